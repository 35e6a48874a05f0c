//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run alone with `cargo test -p snn-cli --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snn_core::backprop::{cost, gradient_check, sample_gradient, seeded_case, GradientSet};
use snn_core::data::{one_hot, synth, SynthKind};
use snn_core::model_io;
use snn_core::optimize::{batch_gradient, evaluate, full_gradient, minibatches, train};
use snn_core::sparsity::{calibrate_epsilon, epsilon_sweep, prune_to_target, retrain, sparsity_report};
use snn_core::{
    ActivationKind, Error, LabeledSample, Matrix, Method, Network, NetworkShape, OptimizerConfig, ThresholdMode,
    Vector,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sigmoid_net(widths: &[usize], seed: u64) -> Network {
    let shape = NetworkShape::new(widths.to_vec()).unwrap();
    Network::init(&shape, &vec![ActivationKind::sigmoid(); shape.depth()], seed).unwrap()
}

fn two_clusters() -> Vec<LabeledSample> {
    synth(SynthKind::TwoClusters, 200, 1).unwrap().samples
}

fn dense_config(epochs: usize) -> OptimizerConfig {
    OptimizerConfig {
        method: Method::MiniBatch,
        batch_size: 10,
        learning_rate: 0.5,
        epochs,
        seed: 1,
        ..OptimizerConfig::default()
    }
}

fn gradient_oracle() -> Outcome {
    let start = Instant::now();
    let shapes = [vec![3, 2], vec![3, 4, 2], vec![5, 4, 3, 2]];
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let shape = NetworkShape::new(shapes[seed as usize % 3].clone()).unwrap();
        let acts = vec![ActivationKind::sigmoid(); shape.depth()];
        let (net, sample) = seeded_case(&shape, &acts, seed).unwrap();
        let report = gradient_check(&net, &sample, 1e-5, 1e-6).unwrap();
        if report.excluded != 0 || !report.passed {
            return Err(format!("seed {seed}: {report:?}"));
        }
        worst = worst.max(report.max_relative_error);
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-6 && elapsed <= Duration::from_secs(5),
        format!("20 networks, max relative error {worst:.2e}, {elapsed:.2?}"),
    )
}

fn closed_form() -> Outcome {
    let layer = snn_core::network::LayerParams::new(
        Matrix::from_rows(&[&[0.0]]).unwrap(),
        Vector::new(vec![0.0]),
        ActivationKind::sigmoid(),
    )
    .unwrap();
    let net = Network::from_layers(vec![layer]).unwrap();
    let sample = LabeledSample::new(Vector::new(vec![1.0]), Vector::new(vec![0.0]));
    let g = sample_gradient(&net, &sample, ThresholdMode::AsStored).unwrap();
    let (dw, db) = (g.weights[0].as_slice()[0], g.biases[0][0]);
    check(
        (dw - 0.25).abs() <= 1e-12 && (db - 0.25).abs() <= 1e-12,
        format!("dC/dw = {dw}, dC/db = {db}"),
    )
}

fn digit_eight_walkthrough() -> Outcome {
    let outputs = Vector::new(vec![0.4, 0.7, 0.2, 0.1, 0.0, 0.4, 1.0, 0.1, 0.0, 0.3]);
    let target = one_hot(8, 10).unwrap();
    let c = cost(&outputs, &target).unwrap();
    let predicted = snn_core::network::predict_from_outputs(&outputs);
    check(
        (c - 2.96).abs() <= 1e-12 && predicted == 6,
        format!("cost {c}, predicted {predicted}"),
    )
}

fn train_dense() -> Result<(Network, f64, Duration), String> {
    let start = Instant::now();
    let (net, _) = train(sigmoid_net(&[2, 8, 2], 1), &two_clusters(), &dense_config(500), None)
        .map_err(|e| e.to_string())?;
    let acc = evaluate(&net, &two_clusters()).map_err(|e| e.to_string())?.accuracy;
    Ok((net, acc, start.elapsed()))
}

fn desk_training(dense: &Result<(Network, f64, Duration), String>) -> Outcome {
    let (_, acc, elapsed) = dense.as_ref().map_err(Clone::clone)?;
    check(
        *acc >= 0.98 && *elapsed <= Duration::from_secs(10),
        format!("accuracy {acc}, {elapsed:.2?}"),
    )
}

fn prune_retrain(dense: &Result<(Network, f64, Duration), String>) -> Outcome {
    let (net, dense_acc, _) = dense.as_ref().map_err(Clone::clone)?;
    let data = two_clusters();
    let (pruned, mask, theta) = prune_to_target(net, 0.35).map_err(|e| e.to_string())?;
    let (sparse, _) = retrain(pruned, &mask, &data, &dense_config(200)).map_err(|e| e.to_string())?;
    let acc = evaluate(&sparse, &data).map_err(|e| e.to_string())?.accuracy;
    let zeros_held = mask.check_zeros(&sparse).is_ok();
    let ws = sparsity_report(&sparse, &data).map_err(|e| e.to_string())?.weight_sparsity();
    check(
        zeros_held && (dense_acc - acc) <= 0.02,
        format!(
            "theta {theta:.4}, weight sparsity {ws:.4}, accuracy {dense_acc} -> {acc}, masked weights zero: {zeros_held}"
        ),
    )
}

fn activation_sparsity(dense: &Result<(Network, f64, Duration), String>) -> Outcome {
    let (net, _, _) = dense.as_ref().map_err(Clone::clone)?;
    let data = two_clusters();
    let mut details = Vec::new();
    let mut ok = true;
    for q in [0.4, 0.6, 0.9] {
        let t = calibrate_epsilon(net, &data, q).map_err(|e| e.to_string())?;
        let s = sparsity_report(&t, &data).map_err(|e| e.to_string())?.activation_sparsity();
        ok &= s >= q - 0.02;
        details.push(format!("q={q}: {s:.4}"));
    }
    let rows = epsilon_sweep(net, &data, &[0.0, 0.25, 0.5, 1.0, 2.0]).map_err(|e| e.to_string())?;
    let monotone = rows.windows(2).all(|p| p[0].activation_sparsity <= p[1].activation_sparsity);
    let column: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.activation_sparsity)).collect();
    check(
        ok && monotone,
        format!("{}; sweep [{}]", details.join(", "), column.join(", ")),
    )
}

fn batch_linearity() -> Outcome {
    let data = synth(SynthKind::Xor, 37, 5).unwrap().samples;
    let net = sigmoid_net(&[2, 5, 2], 11);
    let full = full_gradient(&net, &data, ThresholdMode::AsStored).unwrap();
    let mut combined = GradientSet::zeros_like(&net);
    for batch in minibatches(37, 5, 3).unwrap() {
        let mut g = batch_gradient(&net, &data, &batch, ThresholdMode::AsStored).unwrap();
        g.scale(batch.len() as f64 / 37.0);
        combined.add_assign(&g);
    }
    let worst = full
        .flatten()
        .iter()
        .zip(combined.flatten().iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    check(worst <= 1e-10, format!("N=37, B=5, max componentwise difference {worst:.2e}"))
}

fn partition() -> Outcome {
    let mut checked = 0;
    for seed in 0..100u64 {
        for (n, b) in [(1, 1), (37, 5), (200, 10), (64, 64), (10, 32)] {
            let batches = minibatches(n, b, seed).map_err(|e| e.to_string())?;
            let mut seen = vec![0u32; n];
            for batch in &batches {
                if batch.is_empty() || batch.len() > b {
                    return Err(format!("seed {seed}, n={n}, B={b}: batch of {}", batch.len()));
                }
                for &i in batch {
                    seen[i] += 1;
                }
            }
            if seen.iter().any(|&c| c != 1) {
                return Err(format!("seed {seed}, n={n}, B={b}: not a partition"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (seed, N, B) cases are exact partitions"))
}

fn random_network(rng: &mut ChaCha8Rng) -> Network {
    let depth = rng.random_range(1..4);
    let widths: Vec<usize> = (0..=depth).map(|_| rng.random_range(1..6)).collect();
    let shape = NetworkShape::new(widths.clone()).unwrap();
    let acts = widths[1..]
        .iter()
        .map(|&w| match rng.random_range(0..6) {
            0 => ActivationKind::identity(),
            1 => ActivationKind::relu(),
            2 => ActivationKind::modified_relu(rng.random_range(0.0..1.0)).unwrap(),
            3 => ActivationKind::thresholded_sigmoid(rng.random_range(0.0..1.0)).unwrap(),
            4 => ActivationKind::thresholded_sigmoid_per_neuron((0..w).map(|_| rng.random_range(0.0..1.0)).collect())
                .unwrap(),
            _ => ActivationKind::sigmoid(),
        })
        .collect::<Vec<_>>();
    let mut net = Network::init(&shape, &acts, rng.random()).unwrap();
    for layer in net.layers_mut() {
        for b in layer.biases_mut().as_mut_slice() {
            *b = rng.random_range(-1.0..1.0);
        }
    }
    net
}

fn serialization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let bits = |n: &Network| n.flatten_params().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    for i in 0..10 {
        let net = random_network(&mut rng);
        let (pruned, mask, _) = prune_to_target(&net, rng.random_range(0.0..1.0)).unwrap();
        let bytes = model_io::encode(&pruned, Some(&mask)).map_err(|e| e.to_string())?;
        let (back, back_mask) = model_io::decode(&bytes).map_err(|e| e.to_string())?;
        let same = bits(&back) == bits(&pruned)
            && back.activations() == pruned.activations()
            && back_mask.as_ref() == Some(&mask)
            && model_io::encode(&back, back_mask.as_ref()).unwrap() == bytes;
        if !same {
            return Err(format!("network {i} ({}) did not round-trip", pruned.shape()));
        }
        for version in [0u32, 2, u32::MAX] {
            let mut tampered = bytes.clone();
            tampered[4..8].copy_from_slice(&version.to_le_bytes());
            if !matches!(model_io::decode(&tampered), Err(Error::ModelVersion { .. })) {
                return Err(format!("version {version} accepted"));
            }
        }
    }
    Ok("10 masked networks bit-identical after save/load; versions 0, 2, u32::MAX rejected".into())
}

fn determinism() -> Outcome {
    let run = || -> Result<(Vec<u8>, Vec<u8>), String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let status = Command::new(env!("CARGO_BIN_EXE_snn"))
            .args([
                "train", "--data", "synth:two-clusters:200:seed=1", "--shape", "2,8,2", "--method", "minibatch",
                "--batch", "10", "--lr", "0.5", "--momentum", "0.9", "--adaptive", "--epochs", "40", "--seed", "1",
                "--out", "model.snn", "--history", "history.csv",
            ])
            .current_dir(dir.path())
            .env_remove("SNN_SEED")
            .output()
            .map_err(|e| e.to_string())?
            .status;
        if !status.success() {
            return Err(format!("train exited with {status}"));
        }
        let read = |n: &str| std::fs::read(dir.path().join(n)).map_err(|e| e.to_string());
        Ok((read("model.snn")?, read("history.csv")?))
    };
    let (a, b) = (run()?, run()?);
    check(
        a == b,
        format!("model {} bytes, history {} bytes, identical: {}", a.0.len(), a.1.len(), a == b),
    )
}

fn main() {
    let dense = train_dense();
    let criteria: Vec<Criterion> = vec![
        ("gradient oracle suite", Box::new(gradient_oracle)),
        ("closed-form 1-1 gradient", Box::new(closed_form)),
        ("digit-8 cost and prediction", Box::new(digit_eight_walkthrough)),
        ("desk-scale training", Box::new(|| desk_training(&dense))),
        ("prune-retrain retention", Box::new(|| prune_retrain(&dense))),
        ("activation sparsity by quantile", Box::new(|| activation_sparsity(&dense))),
        ("batch linearity", Box::new(batch_linearity)),
        ("minibatch partition", Box::new(partition)),
        ("serialization round trip", Box::new(serialization)),
        ("end-to-end determinism", Box::new(determinism)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {:>2}. {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
