//! Playground state: a two-input dataset, a 2-H-2 network, and the
//! operations the page exposes. No browser types appear here.

use serde_json::{json, Value};
use snn_core::data::{synth, SynthKind};
use snn_core::optimize::{evaluate, train, Method, OptimizerConfig};
use snn_core::sparsity::{epsilon_sweep, prune_to_target, retrain, sparsity_report, PruneMask};
use snn_core::{ActivationKind, LabeledSample, Network, NetworkShape, Result, Vector};

pub struct Session {
    data: Vec<LabeledSample>,
    net: Network,
    mask: Option<PruneMask>,
    seed: u64,
    epochs_run: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TrainParams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub momentum: f64,
    pub adaptive: bool,
}

impl Session {
    pub fn new(kind: &str, n: usize, seed: u64, hidden: usize) -> Result<Self> {
        let kind: SynthKind = kind.parse()?;
        let data = synth(kind, n, seed)?.samples;
        let shape = NetworkShape::new(vec![2, hidden, 2])?;
        let net = Network::init(&shape, &[ActivationKind::sigmoid(), ActivationKind::sigmoid()], seed)?;
        Ok(Session {
            data,
            net,
            mask: None,
            seed,
            epochs_run: 0,
        })
    }

    fn config(&self, p: TrainParams) -> OptimizerConfig {
        OptimizerConfig {
            method: Method::MiniBatch,
            learning_rate: p.learning_rate,
            batch_size: p.batch_size,
            momentum: p.momentum,
            adaptive: p.adaptive,
            epochs: p.epochs,
            // Each call continues the run with fresh shuffles.
            seed: self.seed.wrapping_add(self.epochs_run as u64),
            ..OptimizerConfig::default()
        }
    }

    /// Trains further (holding pruned weights at zero, if any) and returns
    /// `{"epochs": [...], "costs": [...], "accuracies": [...]}`.
    pub fn train(&mut self, p: TrainParams) -> Result<Value> {
        let cfg = self.config(p);
        let (net, history) = match &self.mask {
            Some(mask) => retrain(self.net.clone(), mask, &self.data, &cfg)?,
            None => train(self.net.clone(), &self.data, &cfg, None)?,
        };
        self.net = net;
        let offset = self.epochs_run;
        self.epochs_run += p.epochs;
        Ok(json!({
            "epochs": history.records.iter().map(|r| r.epoch + offset).collect::<Vec<_>>(),
            "costs": history.records.iter().map(|r| r.mean_cost).collect::<Vec<_>>(),
            "accuracies": history.records.iter().map(|r| r.accuracy).collect::<Vec<_>>(),
        }))
    }

    /// Row-major `resolution × resolution` grid over the unit square, bottom
    /// row first: each cell is `a_1 / (a_0 + a_1)`, or 0.5 when both are 0.
    pub fn boundary(&self, resolution: usize) -> Result<Vec<f64>> {
        let r = resolution.max(2);
        let step = 1.0 / (r - 1) as f64;
        let mut out = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let a = self.net.output(&Vector::new(vec![j as f64 * step, i as f64 * step]))?;
                let total = a[0] + a[1];
                out.push(if total > 0.0 { a[1] / total } else { 0.5 });
            }
        }
        Ok(out)
    }

    /// Flat `[x, y, label, x, y, label, ...]`.
    pub fn points(&self) -> Vec<f64> {
        self.data
            .iter()
            .flat_map(|s| [s.input[0], s.input[1], s.label() as f64])
            .collect()
    }

    /// Prunes to `target`, then retrains with the mask. Returns the
    /// threshold and accuracy before and after.
    pub fn prune(&mut self, target: f64, p: TrainParams) -> Result<Value> {
        let before = evaluate(&self.net, &self.data)?.accuracy;
        let (pruned, mask, theta) = prune_to_target(&self.net, target)?;
        let pruned_acc = evaluate(&pruned, &self.data)?.accuracy;
        self.net = pruned;
        self.mask = Some(mask);
        let curve = self.train(p)?;
        let report = sparsity_report(&self.net, &self.data)?;
        Ok(json!({
            "theta": theta,
            "weight_sparsity": report.weight_sparsity(),
            "accuracy_dense": before,
            "accuracy_pruned": pruned_acc,
            "accuracy_retrained": evaluate(&self.net, &self.data)?.accuracy,
            "curve": curve,
        }))
    }

    /// Uniform thresholds `0, max/(steps-1), ..., max`.
    pub fn sweep(&self, max_epsilon: f64, steps: usize) -> Result<Value> {
        let steps = steps.max(2);
        let eps: Vec<f64> = (0..steps)
            .map(|i| max_epsilon * i as f64 / (steps - 1) as f64)
            .collect();
        let rows = epsilon_sweep(&self.net, &self.data, &eps)?;
        Ok(json!({
            "epsilon": rows.iter().map(|r| r.epsilon).collect::<Vec<_>>(),
            "activation_sparsity": rows.iter().map(|r| r.activation_sparsity).collect::<Vec<_>>(),
            "accuracy": rows.iter().map(|r| r.accuracy).collect::<Vec<_>>(),
        }))
    }

    pub fn accuracy(&self) -> Result<f64> {
        Ok(evaluate(&self.net, &self.data)?.accuracy)
    }

    pub fn frozen_weights(&self) -> usize {
        self.mask.as_ref().map_or(0, PruneMask::frozen_count)
    }
}
