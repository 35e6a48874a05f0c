//! `--config` files: one `key = value` per line, keys named like the long
//! flags (`lr = 0.1`, `eps-sweep = 0,0.5,1`). Blank lines and lines starting
//! with `#` are skipped. Entries are spliced in front of the command-line
//! flags, so an explicit flag overrides the file.

use std::ffi::OsString;
use std::path::Path;

const SUBCOMMANDS: [&str; 6] = ["train", "eval", "gradcheck", "prune", "retrain", "sparsity"];

/// Flags that take no value; `true` turns them on, `false` leaves them off.
const SWITCHES: [&str; 1] = ["adaptive"];

fn config_path(argv: &[OsString]) -> Result<Option<OsString>, String> {
    let mut it = argv.iter().skip(1);
    while let Some(arg) = it.next() {
        let Some(s) = arg.to_str() else { continue };
        if s == "--config" {
            return it
                .next()
                .cloned()
                .map(Some)
                .ok_or_else(|| "--config needs a path".to_owned());
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some(p.into()));
        }
    }
    Ok(None)
}

/// Turns file contents into flag tokens.
pub fn tokens(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`, got `{line}`", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key `{key}`", i + 1));
        }
        if SWITCHES.contains(&key.as_str()) {
            match value {
                "true" => out.push(format!("--{key}")),
                "false" => {}
                other => {
                    return Err(format!(
                        "config line {}: `{key}` takes true or false, got `{other}`",
                        i + 1
                    ))
                }
            }
        } else {
            out.push(format!("--{key}"));
            out.push(value.to_owned());
        }
    }
    Ok(out)
}

/// Splices the entries of the `--config` file, if any, right after the
/// subcommand name.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let extra = tokens(&text)?;
    let Some(at) = argv
        .iter()
        .position(|a| a.to_str().is_some_and(|s| SUBCOMMANDS.contains(&s)))
    else {
        return Ok(argv);
    };
    let mut out = argv;
    out.splice(at + 1..at + 1, extra.into_iter().map(OsString::from));
    Ok(out)
}
