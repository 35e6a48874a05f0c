//! Gradient descent variants and the training loop.
//!
//! One update rule covers every variant:
//!
//! ```text
//! v  <- β v + g
//! s  <- s + g²                  (adaptive only)
//! θ  <- θ - η / (√s + δ) · v    (adaptive)
//! θ  <- θ - η · v               (otherwise)
//! ```
//!
//! `β = 0` with adaptive off is plain descent. Batch gradients are means over
//! the batch, reduced in ascending sample-index order so results do not
//! depend on shuffle order within a batch.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backprop::{self, GradientSet, LabeledSample};
use crate::error::{Error, Result};
use crate::network::{Network, ThresholdMode};
use crate::sparsity::{self, PruneMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FullBatch,
    /// Mini-batch with `B = 1`.
    Sgd,
    MiniBatch,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::FullBatch => "full-batch",
            Method::Sgd => "sgd",
            Method::MiniBatch => "minibatch",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full-batch" => Ok(Method::FullBatch),
            "sgd" => Ok(Method::Sgd),
            "minibatch" => Ok(Method::MiniBatch),
            other => Err(Error::InvalidConfig(format!(
                "unknown method `{other}` (expected full-batch, sgd or minibatch)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    pub learning_rate: f64,
    /// Only read for [`Method::MiniBatch`].
    pub batch_size: usize,
    pub momentum: f64,
    pub adaptive: bool,
    pub adaptive_damping: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Run training passes with thresholds active. When false, thresholded
    /// layers train as their base nonlinearity and cut only at evaluation.
    pub threshold_during_training: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::MiniBatch,
            learning_rate: 0.5,
            batch_size: 32,
            momentum: 0.0,
            adaptive: false,
            adaptive_damping: 1e-8,
            epochs: 50,
            seed: 0,
            threshold_during_training: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be finite and > 0, got {}",
                self.learning_rate
            )));
        }
        if self.method == Method::MiniBatch && self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.adaptive_damping.is_finite() && self.adaptive_damping > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "adaptive damping must be finite and > 0, got {}",
                self.adaptive_damping
            )));
        }
        Ok(())
    }

    fn mode(&self) -> ThresholdMode {
        if self.threshold_during_training {
            ThresholdMode::AsStored
        } else {
            ThresholdMode::Unthresholded
        }
    }
}

/// Momentum velocity and adaptive squared-gradient sums, shaped like the
/// network.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub velocity: GradientSet,
    pub squared: GradientSet,
}

impl OptimizerState {
    pub fn new(net: &Network) -> Self {
        OptimizerState {
            velocity: GradientSet::zeros_like(net),
            squared: GradientSet::zeros_like(net),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_cost: f64,
    pub accuracy: f64,
    pub weight_sparsity: f64,
    pub activation_sparsity: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainingHistory {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

/// Shuffles `0..dataset_size` with `seed` and cuts it into chunks of `batch`;
/// the last chunk may be short.
pub fn minibatches(dataset_size: usize, batch: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if batch == 0 {
        return Err(Error::InvalidConfig("batch size must be >= 1".into()));
    }
    if dataset_size == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..dataset_size).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(order.chunks(batch).map(<[usize]>::to_vec).collect())
}

/// Mean per-sample gradient over `indices`.
pub fn batch_gradient(
    net: &Network,
    data: &[LabeledSample],
    indices: &[usize],
    mode: ThresholdMode,
) -> Result<GradientSet> {
    if indices.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    let mut total = GradientSet::zeros_like(net);
    for &i in &sorted {
        total.add_assign(&backprop::sample_gradient(net, &data[i], mode)?);
    }
    total.scale(1.0 / sorted.len() as f64);
    Ok(total)
}

/// Mean gradient over the whole dataset.
pub fn full_gradient(net: &Network, data: &[LabeledSample], mode: ThresholdMode) -> Result<GradientSet> {
    let all: Vec<usize> = (0..data.len()).collect();
    batch_gradient(net, data, &all, mode)
}

/// One parameter update. Weights frozen by `mask` are held at exactly 0.
pub fn step(
    net: &mut Network,
    grads: &GradientSet,
    state: &mut OptimizerState,
    cfg: &OptimizerConfig,
    mask: Option<&PruneMask>,
) -> Result<()> {
    grads.check(net, "optimizer step")?;
    state.velocity.check(net, "optimizer state")?;
    state.squared.check(net, "optimizer state")?;
    if let Some(m) = mask {
        m.check(net)?;
    }

    let update = |theta: &mut f64, g: f64, v: &mut f64, s: &mut f64| {
        *v = cfg.momentum * *v + g;
        let rate = if cfg.adaptive {
            *s += g * g;
            cfg.learning_rate / (s.sqrt() + cfg.adaptive_damping)
        } else {
            cfg.learning_rate
        };
        *theta -= rate * *v;
    };

    for (l, layer) in net.layers_mut().enumerate() {
        let frozen = mask.map(|m| m.layer(l));
        let w = layer.weights_mut().as_mut_slice();
        let gw = grads.weights[l].as_slice();
        let vw = state.velocity.weights[l].as_mut_slice();
        let sw = state.squared.weights[l].as_mut_slice();
        for i in 0..w.len() {
            if frozen.is_some_and(|f| !f[i]) {
                w[i] = 0.0;
                vw[i] = 0.0;
                continue;
            }
            update(&mut w[i], gw[i], &mut vw[i], &mut sw[i]);
        }

        let b = layer.biases_mut().as_mut_slice();
        let gb = grads.biases[l].as_slice();
        let vb = state.velocity.biases[l].as_mut_slice();
        let sb = state.squared.biases[l].as_mut_slice();
        for i in 0..b.len() {
            update(&mut b[i], gb[i], &mut vb[i], &mut sb[i]);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub mean_cost: f64,
    pub accuracy: f64,
}

/// Mean cost and argmax accuracy with thresholds as stored.
pub fn evaluate(net: &Network, data: &[LabeledSample]) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    let mut correct = 0usize;
    for s in data {
        let out = net.output(&s.input)?;
        total += backprop::cost(&out, &s.target)?;
        if crate::network::predict_from_outputs(&out) == s.label() {
            correct += 1;
        }
    }
    Ok(Evaluation {
        mean_cost: total / data.len() as f64,
        accuracy: correct as f64 / data.len() as f64,
    })
}

fn epoch_batches(cfg: &OptimizerConfig, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    match cfg.method {
        Method::FullBatch => Ok(vec![(0..n).collect()]),
        Method::Sgd => minibatches(n, 1, rng.random()),
        Method::MiniBatch => minibatches(n, cfg.batch_size, rng.random()),
    }
}

pub fn train(
    net: Network,
    data: &[LabeledSample],
    cfg: &OptimizerConfig,
    mask: Option<&PruneMask>,
) -> Result<(Network, TrainingHistory)> {
    train_with(net, data, cfg, mask, |_, _| {})
}

/// Training loop with a callback after every epoch.
///
/// Each epoch draws a fresh shuffle seed from a stream seeded by `cfg.seed`,
/// so two runs with equal inputs are bit-identical.
pub fn train_with(
    mut net: Network,
    data: &[LabeledSample],
    cfg: &OptimizerConfig,
    mask: Option<&PruneMask>,
    mut on_epoch: impl FnMut(&EpochRecord, &Network),
) -> Result<(Network, TrainingHistory)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(m) = mask {
        m.check(&net)?;
        m.check_zeros(&net)?;
    }
    let (n_in, n_out) = (net.shape().input_width(), net.shape().output_width());
    if let Some(bad) = data
        .iter()
        .find(|s| s.input.len() != n_in || s.target.len() != n_out)
    {
        return Err(Error::shape(
            "train",
            format!("network {}", net.shape()),
            format!("sample {}→{}", bad.input.len(), bad.target.len()),
        ));
    }

    let mode = cfg.mode();
    let mut state = OptimizerState::new(&net);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut history = TrainingHistory::default();

    for epoch in 1..=cfg.epochs {
        for batch in epoch_batches(cfg, data.len(), &mut rng)? {
            let g = batch_gradient(&net, data, &batch, mode)?;
            step(&mut net, &g, &mut state, cfg, mask)?;
        }
        let eval = evaluate(&net, data)?;
        if !eval.mean_cost.is_finite() || !net.is_finite() {
            return Err(Error::NonFinite { epoch });
        }
        let report = sparsity::sparsity_report(&net, data)?;
        let record = EpochRecord {
            epoch,
            mean_cost: eval.mean_cost,
            accuracy: eval.accuracy,
            weight_sparsity: report.weight_sparsity(),
            activation_sparsity: report.activation_sparsity(),
        };
        on_epoch(&record, &net);
        history.records.push(record);
    }
    Ok((net, history))
}
