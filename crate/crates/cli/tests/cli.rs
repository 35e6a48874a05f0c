use std::path::Path;
use std::process::{Command, Output};

const DATA: &str = "synth:two-clusters:60:seed=2";

fn snn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snn"))
        .args(args)
        .current_dir(dir)
        .env_remove("SNN_SEED")
        .output()
        .expect("spawn snn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn train_small(dir: &Path, out: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "train", "--data", DATA, "--shape", "2,4,2", "--batch", "6", "--epochs", "20", "--seed", "3", "--out", out,
    ];
    args.extend_from_slice(extra);
    snn(dir, &args)
}

#[test]
fn gradcheck_table_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = snn(dir.path(), &["gradcheck", "--shape", "3,4,2", "--seeds", "20"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.ends_with("pass")).count(), 20);
}

#[test]
fn gradcheck_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = snn(dir.path(), &["gradcheck", "--seeds", "2", "--tol", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn zero_epochs_writes_initial_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = train_small(dir.path(), "a.snn", &["--epochs", "0", "--history", "h.csv"]);
    assert_eq!(code(&out), 0);
    let (net, mask) = snn_core::model_io::load(&dir.path().join("a.snn")).unwrap();
    let shape = snn_core::NetworkShape::parse("2,4,2").unwrap();
    let acts = vec![snn_core::ActivationKind::sigmoid(); 2];
    assert_eq!(net, snn_core::Network::init(&shape, &acts, 3).unwrap());
    assert!(mask.is_none());
    let history = std::fs::read_to_string(dir.path().join("h.csv")).unwrap();
    assert_eq!(history, "epoch,mean_cost,accuracy,weight_sparsity,activation_sparsity\n");
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&train_small(dir.path(), "m.snn", &[])), 0);
    let cases: &[&[&str]] = &[
        &["prune", "--model", "m.snn", "--target", "1.5", "--out", "p.snn"],
        &["prune", "--model", "m.snn", "--out", "p.snn"],
        &["train", "--bogus"],
        &["frobnicate"],
        &["train", "--data", "nope:x", "--shape", "2,2", "--out", "x.snn"],
        &["train", "--data", DATA, "--shape", "2,2", "--lr", "-1", "--out", "x.snn"],
        &["train", "--data", DATA, "--shape", "3,2", "--out", "x.snn"],
        &["train", "--data", DATA, "--shape", "2,2", "--activations", "thresholded-sigmoid", "--out", "x.snn"],
        &["eval", "--model", "missing.snn", "--data", DATA],
    ];
    for args in cases {
        assert_eq!(code(&snn(dir.path(), args)), 1, "{args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&snn(dir.path(), &["--help"])), 0);
    assert_eq!(code(&snn(dir.path(), &["train", "--help"])), 0);
    assert_eq!(code(&snn(dir.path(), &["--version"])), 0);
}

#[test]
fn prune_retrain_sparsity_compose() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&train_small(d, "m.snn", &[])), 0);
    assert_eq!(
        code(&snn(d, &["prune", "--model", "m.snn", "--target", "0.5", "--out", "p.snn", "--mask", "p.mask"])),
        0
    );
    let out = snn(
        d,
        &["retrain", "--model", "p.snn", "--mask", "p.mask", "--data", DATA, "--epochs", "5", "--out", "r.snn"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (net, mask) = snn_core::model_io::load(&d.join("r.snn")).unwrap();
    let mask = mask.expect("retrained model keeps its mask");
    mask.check_zeros(&net).unwrap();
    assert_eq!(mask.frozen_count(), 8);

    let out = snn(
        d,
        &["sparsity", "--model", "r.snn", "--data", DATA, "--eps-sweep", "0,0.5,1", "--out", "s.csv"],
    );
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(d.join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epsilon,activation_sparsity,weight_sparsity,accuracy,mean_cost"));
    let sparsity: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(sparsity.len(), 3);

    let out = snn(
        d,
        &["sparsity", "--model", "r.snn", "--data", DATA, "--calibrate", "0.5", "--model-out", "t.snn"],
    );
    assert_eq!(code(&out), 0);
    let (t, _) = snn_core::model_io::load(&d.join("t.snn")).unwrap();
    assert!(t.layers().iter().all(|l| l.activation().is_thresholded()));

    let out = snn(d, &["sparsity", "--model", "r.snn", "--data", DATA, "--eps-sweep", "1,0"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn config_file_supplies_flags_and_cli_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.conf"),
        format!("data = {DATA}\nshape = 2,4,2\nbatch = 6\nepochs = 20\nseed = 3\nout = c.snn\n"),
    )
    .unwrap();
    assert_eq!(code(&snn(d, &["train", "--config", "run.conf"])), 0);
    assert_eq!(code(&train_small(d, "direct.snn", &[])), 0);
    assert_eq!(std::fs::read(d.join("c.snn")).unwrap(), std::fs::read(d.join("direct.snn")).unwrap());

    assert_eq!(code(&snn(d, &["train", "--config", "run.conf", "--epochs", "0", "--out", "zero.snn"])), 0);
    assert_ne!(std::fs::read(d.join("zero.snn")).unwrap(), std::fs::read(d.join("c.snn")).unwrap());

    std::fs::write(d.join("bad.conf"), "no equals sign\n").unwrap();
    assert_eq!(code(&snn(d, &["train", "--config", "bad.conf"])), 1);
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let base = ["train", "--data", DATA, "--shape", "2,3,2", "--epochs", "0"];
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_snn"));
        cmd.args(base).args(extra).current_dir(d).env_remove("SNN_SEED");
        if let Some(v) = env {
            cmd.env("SNN_SEED", v);
        }
        assert!(cmd.output().unwrap().status.success());
    };
    run(Some("7"), &["--out", "env.snn"]);
    run(None, &["--seed", "7", "--out", "flag.snn"]);
    run(None, &["--out", "default.snn"]);
    let read = |n: &str| std::fs::read(d.join(n)).unwrap();
    assert_eq!(read("env.snn"), read("flag.snn"));
    assert_ne!(read("env.snn"), read("default.snn"));
}
