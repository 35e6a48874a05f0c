//! Weight pruning, activation thresholds and sparsity accounting.
//!
//! Sparsity always means the fraction of values that are exactly `0.0`.
//! Thresholded activations and pruned weights are hard zeros, so counting
//! needs no tolerance.

use crate::activation::{ActivationKind, ActivationTag, Epsilon};
use crate::backprop::LabeledSample;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::optimize::{self, EpochRecord, OptimizerConfig, TrainingHistory};

/// Per-layer weight masks, `true` = trainable, `false` = frozen at zero.
/// Entries follow the row-major weight layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneMask {
    layers: Vec<Vec<bool>>,
}

impl PruneMask {
    /// Nothing frozen.
    pub fn dense(net: &Network) -> Self {
        PruneMask {
            layers: net
                .layers()
                .iter()
                .map(|l| vec![true; l.weights().as_slice().len()])
                .collect(),
        }
    }

    pub fn from_layers(layers: Vec<Vec<bool>>) -> Self {
        PruneMask { layers }
    }

    pub fn layer(&self, l: usize) -> &[bool] {
        &self.layers[l]
    }

    pub fn layers(&self) -> &[Vec<bool>] {
        &self.layers
    }

    pub fn frozen_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.iter().filter(|&&a| !a).count())
            .sum()
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check(&self, net: &Network) -> Result<()> {
        let ok = self.layers.len() == net.layers().len()
            && self
                .layers
                .iter()
                .zip(net.layers())
                .all(|(m, l)| m.len() == l.weights().as_slice().len());
        if ok {
            Ok(())
        } else {
            Err(Error::shape(
                "prune mask",
                format!("network {}", net.shape()),
                format!("mask with {} entries", self.len()),
            ))
        }
    }

    /// Every frozen entry must hold an exact zero.
    pub fn check_zeros(&self, net: &Network) -> Result<()> {
        for (l, (mask, layer)) in self.layers.iter().zip(net.layers()).enumerate() {
            for (index, (&active, &w)) in mask.iter().zip(layer.weights().as_slice()).enumerate() {
                if !active && w != 0.0 {
                    return Err(Error::MaskViolation {
                        layer: l,
                        index,
                        value: w,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Zeroes and freezes every weight with `|w| <= theta`. Biases are untouched.
pub fn prune_by_magnitude(net: &Network, theta: f64) -> Result<(Network, PruneMask)> {
    if theta.is_nan() || theta < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "pruning threshold must be >= 0, got {theta}"
        )));
    }
    let mut pruned = net.clone();
    let mut layers = Vec::with_capacity(net.layers().len());
    for layer in pruned.layers_mut() {
        let w = layer.weights_mut().as_mut_slice();
        let mut mask = Vec::with_capacity(w.len());
        for x in w.iter_mut() {
            let keep = x.abs() > theta;
            if !keep {
                *x = 0.0;
            }
            mask.push(keep);
        }
        layers.push(mask);
    }
    Ok((pruned, PruneMask { layers }))
}

/// `ceil(q * n)` with a little slack so `0.35 * 20` counts as 7, not 8.
fn rank_for_fraction(q: f64, n: usize) -> usize {
    ((q * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Prunes the smallest-magnitude weights so that at least `target` of all
/// weights are zero. Returns the threshold used: the magnitude of the
/// `ceil(target * wt)`-th smallest weight, or 0 when nothing must go.
pub fn prune_to_target(net: &Network, target: f64) -> Result<(Network, PruneMask, f64)> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidConfig(format!(
            "target sparsity must lie in [0, 1], got {target}"
        )));
    }
    let mut mags: Vec<f64> = net
        .layers()
        .iter()
        .flat_map(|l| l.weights().as_slice().iter().map(|w| w.abs()))
        .collect();
    mags.sort_by(f64::total_cmp);
    let k = rank_for_fraction(target, mags.len());
    let theta = if k == 0 { 0.0 } else { mags[k - 1] };
    let (pruned, mask) = prune_by_magnitude(net, theta)?;
    Ok((pruned, mask, theta))
}

/// Thresholds for [`set_epsilon`]: one value for every layer, or one entry
/// per layer (each a scalar or per-neuron vector).
#[derive(Debug, Clone, PartialEq)]
pub enum EpsilonSpec {
    Uniform(f64),
    PerLayer(Vec<Epsilon>),
}

fn thresholded(kind: &ActivationKind, eps: Epsilon) -> Result<ActivationKind> {
    let tag = match kind.tag() {
        ActivationTag::Sigmoid | ActivationTag::ThresholdedSigmoid => ActivationTag::ThresholdedSigmoid,
        ActivationTag::Relu | ActivationTag::ModifiedRelu => ActivationTag::ModifiedRelu,
        ActivationTag::Identity => return Ok(kind.clone()),
    };
    ActivationKind::new(tag, Some(eps))
}

/// Switches sigmoid layers to thresholded-sigmoid and relu layers to
/// modified-relu with the given thresholds. Identity layers are left alone;
/// parameters are untouched.
pub fn set_epsilon(net: &Network, spec: &EpsilonSpec) -> Result<Network> {
    let per_layer: Vec<Epsilon> = match spec {
        EpsilonSpec::Uniform(e) => vec![Epsilon::Scalar(*e); net.layers().len()],
        EpsilonSpec::PerLayer(v) => {
            if v.len() != net.layers().len() {
                return Err(Error::shape(
                    "set epsilon",
                    format!("{} layers", net.layers().len()),
                    format!("{} epsilon entries", v.len()),
                ));
            }
            v.clone()
        }
    };
    let mut out = net.clone();
    for (layer, eps) in out.layers_mut().zip(per_layer) {
        let kind = thresholded(layer.activation(), eps)?;
        layer.set_activation(kind)?;
    }
    Ok(out)
}

/// The smallest sample value `v` with at least `ceil(q * n)` samples `<= v`.
/// `None` when `q` asks for no samples at all.
pub fn empirical_quantile(values: &mut [f64], q: f64) -> Option<f64> {
    values.sort_by(f64::total_cmp);
    let k = rank_for_fraction(q, values.len());
    (k > 0).then(|| values[k - 1])
}

/// Per-layer thresholds set layer by layer at the `q`-quantile of that
/// layer's pre-activations over `data`. Each layer is calibrated with the
/// layers before it already thresholded, so every layer cuts at least a `q`
/// fraction of its activations on `data`. Quantiles below zero are clamped
/// to 0, which only cuts more.
pub fn calibrate_epsilon(net: &Network, data: &[LabeledSample], q: f64) -> Result<Network> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidConfig(format!(
            "quantile must lie in [0, 1], got {q}"
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut out = net.clone();
    for l in 0..out.layers().len() {
        if out.layers()[l].activation().tag() == ActivationTag::Identity {
            continue;
        }
        let mut zs = Vec::with_capacity(data.len() * out.layers()[l].outputs());
        for s in data {
            let trace = out.forward(&s.input)?;
            zs.extend_from_slice(trace.preactivations[l].as_slice());
        }
        let eps = empirical_quantile(&mut zs, q).map_or(0.0, |v| v.max(0.0));
        let kind = thresholded(out.layers()[l].activation(), Epsilon::Scalar(eps))?;
        out.layer_mut(l).set_activation(kind)?;
    }
    Ok(out)
}

/// Retraining with frozen weights; thresholds follow `cfg`.
pub fn retrain(
    net: Network,
    mask: &PruneMask,
    data: &[LabeledSample],
    cfg: &OptimizerConfig,
) -> Result<(Network, TrainingHistory)> {
    optimize::train(net, data, cfg, Some(mask))
}

pub fn retrain_with(
    net: Network,
    mask: &PruneMask,
    data: &[LabeledSample],
    cfg: &OptimizerConfig,
    on_epoch: impl FnMut(&EpochRecord, &Network),
) -> Result<(Network, TrainingHistory)> {
    optimize::train_with(net, data, cfg, Some(mask), on_epoch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ZeroCount {
    pub zeros: usize,
    pub total: usize,
}

impl ZeroCount {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.zeros as f64 / self.total as f64
        }
    }

    fn merge(self, other: ZeroCount) -> ZeroCount {
        ZeroCount {
            zeros: self.zeros + other.zeros,
            total: self.total + other.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityReport {
    /// Zero weights per layer.
    pub weights: Vec<ZeroCount>,
    /// Zero activations per non-input layer, over all samples.
    pub activations: Vec<ZeroCount>,
    pub samples: usize,
    /// Multiply-accumulates in the forward pass whose weight or input
    /// activation is zero, as a share of all of them.
    pub skipped_macs: ZeroCount,
}

impl SparsityReport {
    pub fn weight_counts(&self) -> ZeroCount {
        self.weights.iter().fold(ZeroCount::default(), |a, &b| a.merge(b))
    }

    pub fn activation_counts(&self) -> ZeroCount {
        self.activations
            .iter()
            .fold(ZeroCount::default(), |a, &b| a.merge(b))
    }

    pub fn weight_sparsity(&self) -> f64 {
        self.weight_counts().fraction()
    }

    pub fn activation_sparsity(&self) -> f64 {
        self.activation_counts().fraction()
    }
}

pub fn sparsity_report(net: &Network, data: &[LabeledSample]) -> Result<SparsityReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let weights: Vec<ZeroCount> = net
        .layers()
        .iter()
        .map(|l| {
            let w = l.weights().as_slice();
            ZeroCount {
                zeros: w.iter().filter(|&&x| x == 0.0).count(),
                total: w.len(),
            }
        })
        .collect();
    let mut activations = vec![ZeroCount::default(); net.layers().len()];
    let mut macs = ZeroCount::default();
    for s in data {
        let trace = net.forward(&s.input)?;
        for (l, layer) in net.layers().iter().enumerate() {
            let a = &trace.activations[l + 1];
            activations[l].zeros += a.iter().filter(|&&x| x == 0.0).count();
            activations[l].total += a.len();

            let input = &trace.activations[l];
            let w = layer.weights();
            for j in 0..w.rows() {
                for (u, &wu) in w.row(j).iter().enumerate() {
                    if wu == 0.0 || input[u] == 0.0 {
                        macs.zeros += 1;
                    }
                }
            }
            macs.total += w.rows() * w.cols();
        }
    }
    Ok(SparsityReport {
        weights,
        activations,
        samples: data.len(),
        skipped_macs: macs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub activation_sparsity: f64,
    pub weight_sparsity: f64,
    pub accuracy: f64,
    pub mean_cost: f64,
}

/// One row per threshold, each applied uniformly with [`set_epsilon`].
pub fn epsilon_sweep(net: &Network, data: &[LabeledSample], epsilons: &[f64]) -> Result<Vec<SweepRow>> {
    if let Some(e) = epsilons.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::InvalidEpsilon(format!("{e} (must be finite and >= 0)")));
    }
    if epsilons.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::InvalidConfig(
            "epsilon sweep values must be in ascending order".into(),
        ));
    }
    epsilons
        .iter()
        .map(|&epsilon| {
            let thresholded = set_epsilon(net, &EpsilonSpec::Uniform(epsilon))?;
            let report = sparsity_report(&thresholded, data)?;
            let eval = optimize::evaluate(&thresholded, data)?;
            Ok(SweepRow {
                epsilon,
                activation_sparsity: report.activation_sparsity(),
                weight_sparsity: report.weight_sparsity(),
                accuracy: eval.accuracy,
                mean_cost: eval.mean_cost,
            })
        })
        .collect()
}
