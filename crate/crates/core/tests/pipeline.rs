use snn_core::data::{synth, SynthKind};
use snn_core::optimize::{evaluate, train};
use snn_core::sparsity::{calibrate_epsilon, prune_to_target, retrain, sparsity_report};
use snn_core::{model_io, ActivationKind, Method, Network, NetworkShape, OptimizerConfig};

fn config(epochs: usize) -> OptimizerConfig {
    OptimizerConfig {
        method: Method::MiniBatch,
        batch_size: 10,
        learning_rate: 0.5,
        epochs,
        seed: 1,
        ..OptimizerConfig::default()
    }
}

#[test]
fn train_prune_retrain_save() {
    let data = synth(SynthKind::TwoClusters, 200, 1).unwrap();
    let shape = NetworkShape::parse("2,8,2").unwrap();
    let net = Network::init(&shape, &[ActivationKind::sigmoid(), ActivationKind::sigmoid()], 1).unwrap();

    let (dense, history) = train(net, &data.samples, &config(200), None).unwrap();
    assert_eq!(history.records.len(), 200);
    let dense_acc = evaluate(&dense, &data.samples).unwrap().accuracy;
    assert!(dense_acc >= 0.98, "dense accuracy {dense_acc}");

    let (pruned, mask, _) = prune_to_target(&dense, 0.35).unwrap();
    let (sparse, _) = retrain(pruned, &mask, &data.samples, &config(50)).unwrap();
    mask.check_zeros(&sparse).unwrap();
    let report = sparsity_report(&sparse, &data.samples).unwrap();
    assert!(report.weight_sparsity() >= 0.35);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sparse.snn");
    model_io::save(&sparse, Some(&mask), &path).unwrap();
    let (back, back_mask) = model_io::load(&path).unwrap();
    assert_eq!(back, sparse);
    assert_eq!(back_mask, Some(mask));
}

#[test]
fn calibrated_thresholds_reach_quantile() {
    let data = synth(SynthKind::Xor, 120, 4).unwrap();
    let shape = NetworkShape::parse("2,6,2").unwrap();
    let net = Network::init(&shape, &[ActivationKind::sigmoid(), ActivationKind::sigmoid()], 9).unwrap();
    for q in [0.25, 0.5, 0.75] {
        let t = calibrate_epsilon(&net, &data.samples, q).unwrap();
        let s = sparsity_report(&t, &data.samples).unwrap().activation_sparsity();
        assert!(s >= q - 1e-12, "q={q}: {s}");
    }
}
