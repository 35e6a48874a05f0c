use std::path::Path;

use snn_core::activation::{ActivationKind, ActivationTag, Epsilon};
use snn_core::backprop::{gradient_check, seeded_case};
use snn_core::data::{DataSource, Dataset};
use snn_core::optimize::{evaluate, train, Method, OptimizerConfig};
use snn_core::sparsity::{
    calibrate_epsilon, epsilon_sweep, prune_by_magnitude, prune_to_target, retrain, set_epsilon,
    sparsity_report, EpsilonSpec, PruneMask,
};
use snn_core::{model_io, Network, NetworkShape};

use crate::args::{Command, EvalArgs, GradcheckArgs, OptimArgs, PruneArgs, RetrainArgs, SparsityArgs, TrainArgs};
use crate::output;

#[derive(Debug)]
pub enum Failure {
    /// Bad input or a failed operation; exit code 1.
    Invalid(String),
    /// A check ran and did not pass; exit code 2.
    Check(String),
}

impl From<snn_core::Error> for Failure {
    fn from(e: snn_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn write_file(path: &Path, result: std::io::Result<()>) -> Outcome {
    result.map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Prune(a) => cmd_prune(a),
        Command::Retrain(a) => cmd_retrain(a),
        Command::Sparsity(a) => cmd_sparsity(a),
    }
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("{what}: `{t}` is not a number")))
        })
        .collect()
}

/// One entry broadcast to every layer, or exactly one entry per layer.
fn per_layer<T: Clone>(items: Vec<T>, depth: usize, what: &str) -> Result<Vec<T>, Failure> {
    match items.len() {
        1 => Ok(vec![items[0].clone(); depth]),
        n if n == depth => Ok(items),
        n => Err(invalid(format!("{what}: got {n} entries for {depth} layers"))),
    }
}

fn activations(spec: &str, epsilon: Option<&str>, depth: usize) -> Result<Vec<ActivationKind>, Failure> {
    let tags = spec
        .split(',')
        .map(|t| t.trim().parse::<ActivationTag>())
        .collect::<Result<Vec<_>, _>>()?;
    let tags = per_layer(tags, depth, "--activations")?;
    let eps = epsilon
        .map(|e| parse_floats(e, "--epsilon").and_then(|v| per_layer(v, depth, "--epsilon")))
        .transpose()?;
    tags.into_iter()
        .enumerate()
        .map(|(l, tag)| {
            let e = match (&eps, tag.needs_epsilon()) {
                (_, false) => None,
                (Some(v), true) => Some(Epsilon::Scalar(v[l])),
                (None, true) => return Err(invalid(format!("`{tag}` needs --epsilon"))),
            };
            Ok(ActivationKind::new(tag, e)?)
        })
        .collect()
}

fn epsilon_spec(s: &str, depth: usize) -> Result<EpsilonSpec, Failure> {
    let v = parse_floats(s, "--epsilon")?;
    Ok(if v.len() == 1 {
        EpsilonSpec::Uniform(v[0])
    } else {
        EpsilonSpec::PerLayer(per_layer(v, depth, "--epsilon")?.into_iter().map(Epsilon::Scalar).collect())
    })
}

fn load_data(spec: &str, net: &Network) -> Result<Dataset, Failure> {
    let source: DataSource = spec.parse()?;
    let data = source.load(Some(net.shape().output_width()))?;
    if data.input_dim != net.shape().input_width() {
        return Err(invalid(format!(
            "data has {} features but the network takes {} inputs",
            data.input_dim,
            net.shape().input_width()
        )));
    }
    Ok(data)
}

fn optimizer_config(a: &OptimArgs, threshold_default: bool) -> Result<OptimizerConfig, Failure> {
    let cfg = OptimizerConfig {
        method: a.method.parse::<Method>()?,
        learning_rate: a.lr,
        batch_size: a.batch,
        momentum: a.momentum,
        adaptive: a.adaptive,
        adaptive_damping: a.damping,
        epochs: a.epochs,
        seed: a.seed,
        threshold_during_training: a.threshold_during_training.unwrap_or(threshold_default),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn save_model(net: &Network, mask: Option<&PruneMask>, path: &Path) -> Outcome {
    model_io::save(net, mask, path)?;
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Outcome {
    let cfg = optimizer_config(&a.optim, false)?;
    let (net, mask) = match (&a.model, &a.shape) {
        (Some(path), _) => model_io::load(path)?,
        (None, Some(shape)) => {
            let shape = NetworkShape::parse(shape)?;
            let acts = activations(&a.activations, a.epsilon.as_deref(), shape.depth())?;
            (Network::init(&shape, &acts, cfg.seed)?, None)
        }
        (None, None) => return Err(invalid("either --shape or --model is required")),
    };
    let data = load_data(&a.data, &net)?;
    let (trained, history) = train(net, &data.samples, &cfg, mask.as_ref())?;
    save_model(&trained, mask.as_ref(), &a.out)?;
    if let Some(path) = &a.history {
        write_file(path, output::emit_history_csv(&history, path))?;
    }
    match history.last() {
        Some(r) => println!(
            "trained {} epochs: mean_cost {:.6} accuracy {:.4}",
            r.epoch, r.mean_cost, r.accuracy
        ),
        None => println!("0 epochs: model written unchanged"),
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Outcome {
    let (net, _) = model_io::load(&a.model)?;
    let data = load_data(&a.data, &net)?;
    let eval = evaluate(&net, &data.samples)?;
    let report = sparsity_report(&net, &data.samples)?;
    let count = net.param_count();
    println!("shape: {}", net.shape());
    println!("parameters: {} weights + {} biases", count.wt, count.biases);
    println!("samples: {}", data.len());
    println!("mean_cost: {}", eval.mean_cost);
    println!("accuracy: {}", eval.accuracy);
    println!("weight_sparsity: {}", report.weight_sparsity());
    println!("activation_sparsity: {}", report.activation_sparsity());
    Ok(())
}

fn cmd_gradcheck(a: GradcheckArgs) -> Outcome {
    let shape = NetworkShape::parse(&a.shape)?;
    let acts = activations(&a.activations, a.epsilon.as_deref(), shape.depth())?;
    if a.seeds == 0 {
        return Err(invalid("--seeds must be at least 1"));
    }
    if a.tol.is_nan() || a.tol < 0.0 {
        return Err(invalid(format!("--tol must be >= 0, got {}", a.tol)));
    }
    println!("{:>6}  {:>14}  {:>8}  {:>8}  result", "seed", "max_rel_error", "compared", "excluded");
    let mut failed = 0;
    for seed in a.seed..a.seed + a.seeds {
        let (net, sample) = seeded_case(&shape, &acts, seed)?;
        let report = gradient_check(&net, &sample, a.h, a.tol)?;
        if !report.passed {
            failed += 1;
        }
        println!(
            "{seed:>6}  {:>14.3e}  {:>8}  {:>8}  {}",
            report.max_relative_error,
            report.compared,
            report.excluded,
            if report.passed { "pass" } else { "FAIL" }
        );
    }
    if failed > 0 {
        return Err(Failure::Check(format!(
            "{failed} of {} seeds exceeded tolerance {}",
            a.seeds, a.tol
        )));
    }
    println!("all {} seeds within tolerance {}", a.seeds, a.tol);
    Ok(())
}

fn cmd_prune(a: PruneArgs) -> Outcome {
    let (net, _) = model_io::load(&a.model)?;
    // Weights frozen earlier are already zero, so any theta >= 0 keeps them masked.
    let (pruned, mask, theta) = match (a.target, a.theta) {
        (Some(target), _) => prune_to_target(&net, target)?,
        (None, Some(theta)) => {
            let (p, m) = prune_by_magnitude(&net, theta)?;
            (p, m, theta)
        }
        (None, None) => return Err(invalid("one of --target or --theta is required")),
    };
    save_model(&pruned, Some(&mask), &a.out)?;
    if let Some(path) = &a.mask {
        model_io::save_mask(pruned.shape(), &mask, path)?;
    }
    println!(
        "theta {theta}: froze {} of {} weights",
        mask.frozen_count(),
        mask.len()
    );
    Ok(())
}

fn cmd_retrain(a: RetrainArgs) -> Outcome {
    let cfg = optimizer_config(&a.optim, true)?;
    let (net, embedded) = model_io::load(&a.model)?;
    let mask = match &a.mask {
        Some(path) => {
            let (shape, mask) = model_io::load_mask(path)?;
            if &shape != net.shape() {
                return Err(invalid(format!(
                    "mask is for shape {shape}, model has shape {}",
                    net.shape()
                )));
            }
            mask
        }
        None => embedded.unwrap_or_else(|| PruneMask::dense(&net)),
    };
    let data = load_data(&a.data, &net)?;
    let (trained, history) = retrain(net, &mask, &data.samples, &cfg)?;
    save_model(&trained, Some(&mask), &a.out)?;
    if let Some(path) = &a.history {
        write_file(path, output::emit_history_csv(&history, path))?;
    }
    if let Some(r) = history.last() {
        println!(
            "retrained {} epochs: mean_cost {:.6} accuracy {:.4} weight_sparsity {:.4}",
            r.epoch, r.mean_cost, r.accuracy, r.weight_sparsity
        );
    }
    Ok(())
}

fn cmd_sparsity(a: SparsityArgs) -> Outcome {
    let (net, mask) = model_io::load(&a.model)?;
    let data = load_data(&a.data, &net)?;

    if let Some(list) = &a.eps_sweep {
        let eps = parse_floats(list, "--eps-sweep")?;
        let rows = epsilon_sweep(&net, &data.samples, &eps)?;
        println!(
            "{:>10}  {:>12}  {:>12}  {:>9}  {:>10}",
            "epsilon", "act_sparsity", "wt_sparsity", "accuracy", "mean_cost"
        );
        for r in &rows {
            println!(
                "{:>10}  {:>12.4}  {:>12.4}  {:>9.4}  {:>10.6}",
                r.epsilon, r.activation_sparsity, r.weight_sparsity, r.accuracy, r.mean_cost
            );
        }
        if let Some(path) = &a.out {
            write_file(path, output::emit_sweep_csv(&rows, path))?;
        }
        return Ok(());
    }

    let net = match (a.calibrate, &a.epsilon) {
        (Some(q), _) => calibrate_epsilon(&net, &data.samples, q)?,
        (None, Some(e)) => set_epsilon(&net, &epsilon_spec(e, net.shape().depth())?)?,
        (None, None) => net,
    };
    let report = sparsity_report(&net, &data.samples)?;
    let eval = evaluate(&net, &data.samples)?;
    for (l, (layer, zeros)) in net.layers().iter().zip(&report.activations).enumerate() {
        println!(
            "layer {l}: {} activation_sparsity {:.4} weight_sparsity {:.4}",
            layer.activation(),
            zeros.fraction(),
            report.weights[l].fraction()
        );
    }
    println!("activation_sparsity: {}", report.activation_sparsity());
    println!("weight_sparsity: {}", report.weight_sparsity());
    println!("skipped_macs: {}", report.skipped_macs.fraction());
    println!("accuracy: {}", eval.accuracy);
    println!("mean_cost: {}", eval.mean_cost);
    if let Some(path) = &a.model_out {
        save_model(&net, mask.as_ref(), path)?;
    }
    Ok(())
}
