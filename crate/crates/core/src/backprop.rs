//! Squared-error cost, the backward pass and a finite-difference oracle.
//!
//! Per example the cost is `C = Σ_j (a_j - y_j)^2` over the output layer.
//! The backward pass runs the usual delta recursion; entry for entry it is
//!
//! ```text
//! δ^k_j        = σ_k'(z^k_j) · 2(a^k_j - y_j)             output layer
//! δ^l_u        = σ_l'(z^l_u) · Σ_j w^l_{j,u} δ^{l+1}_j     every path into layer l+1
//! ∂C/∂w^l_{j,u} = a^l_u · δ^{l+1}_j
//! ∂C/∂b^l_j     = δ^{l+1}_j
//! ```
//!
//! where layer `l`'s weights map `a^l` to `z^{l+1}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::network::{ForwardTrace, Network, NetworkShape, ThresholdMode};
use crate::tensor::{self, Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub input: Vector,
    pub target: Vector,
}

impl LabeledSample {
    pub fn new(input: Vector, target: Vector) -> Self {
        LabeledSample { input, target }
    }

    /// Class index of a one-hot target.
    pub fn label(&self) -> usize {
        self.target.argmax().unwrap_or(0)
    }
}

/// Partial derivatives with the same layout as the network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vector>,
}

impl GradientSet {
    pub fn zeros_like(net: &Network) -> Self {
        GradientSet {
            weights: net
                .layers()
                .iter()
                .map(|l| Matrix::zeros(l.outputs(), l.inputs()))
                .collect(),
            biases: net
                .layers()
                .iter()
                .map(|l| Vector::zeros(l.outputs()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.iter().map(|m| m.as_slice().len()).sum::<usize>()
            + self.biases.iter().map(Vector::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Weight partials layer by layer (row-major), then bias partials layer
    /// by layer. Same order as [`Network::flatten_params`].
    pub fn flatten(&self) -> Vector {
        let mut out = Vec::with_capacity(self.len());
        for w in &self.weights {
            out.extend_from_slice(w.as_slice());
        }
        for b in &self.biases {
            out.extend_from_slice(b.as_slice());
        }
        Vector::new(out)
    }

    pub fn matches(&self, net: &Network) -> bool {
        self.weights.len() == net.layers().len()
            && self.biases.len() == net.layers().len()
            && net.layers().iter().enumerate().all(|(l, layer)| {
                self.weights[l].rows() == layer.outputs()
                    && self.weights[l].cols() == layer.inputs()
                    && self.biases[l].len() == layer.outputs()
            })
    }

    pub(crate) fn check(&self, net: &Network, op: &'static str) -> Result<()> {
        if self.matches(net) {
            Ok(())
        } else {
            Err(Error::shape(
                op,
                format!("network {}", net.shape()),
                format!("gradient with {} entries", self.len()),
            ))
        }
    }

    fn slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.weights
            .iter_mut()
            .map(Matrix::as_mut_slice)
            .chain(self.biases.iter_mut().map(Vector::as_mut_slice))
    }

    fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.weights
            .iter()
            .map(Matrix::as_slice)
            .chain(self.biases.iter().map(Vector::as_slice))
    }

    /// `self += other`; shapes must agree.
    pub fn add_assign(&mut self, other: &GradientSet) {
        for (a, b) in self.slices_mut().zip(other.slices()) {
            debug_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.slices_mut() {
            for x in s {
                *x *= factor;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.slices()
            .flat_map(|s| s.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// `Σ_j (a_j - y_j)^2`.
pub fn cost(outputs: &Vector, targets: &Vector) -> Result<f64> {
    if outputs.len() != targets.len() {
        return Err(Error::shape(
            "cost",
            format!("{} outputs", outputs.len()),
            format!("{} targets", targets.len()),
        ));
    }
    Ok(outputs
        .iter()
        .zip(targets.iter())
        .map(|(a, y)| (a - y) * (a - y))
        .sum())
}

/// `δ_j = σ'(z_j) · 2(a_j - y_j)` on the output layer.
pub fn output_delta(
    output_activation: &ActivationKind,
    trace: &ForwardTrace,
    targets: &Vector,
) -> Result<Vector> {
    let z = trace
        .preactivations
        .last()
        .ok_or_else(|| Error::InvalidShape("empty trace".into()))?;
    let a = trace.output();
    if a.len() != targets.len() || z.len() != a.len() {
        return Err(Error::shape(
            "output delta",
            format!("{} outputs", a.len()),
            format!("{} targets", targets.len()),
        ));
    }
    Ok(Vector::new(
        (0..a.len())
            .map(|j| output_activation.deriv_at(j, z[j]) * 2.0 * (a[j] - targets[j]))
            .collect(),
    ))
}

pub fn backward(net: &Network, trace: &ForwardTrace, targets: &Vector) -> Result<GradientSet> {
    backward_with(net, trace, targets, ThresholdMode::AsStored)
}

/// Backward pass for a trace produced by `forward_with(.., mode)`.
pub fn backward_with(
    net: &Network,
    trace: &ForwardTrace,
    targets: &Vector,
    mode: ThresholdMode,
) -> Result<GradientSet> {
    let layers = net.layers();
    let k = layers.len();
    if trace.preactivations.len() != k || trace.activations.len() != k + 1 {
        return Err(Error::shape(
            "backward",
            format!("network with {k} layers"),
            format!("trace with {} layers", trace.preactivations.len()),
        ));
    }

    let mut weights = Vec::with_capacity(k);
    let mut biases = Vec::with_capacity(k);
    let mut delta = output_delta(&mode.resolve(layers[k - 1].activation()), trace, targets)?;
    for l in (0..k).rev() {
        weights.push(tensor::outer(&delta, &trace.activations[l]));
        if l > 0 {
            let carried = tensor::matvec_transposed(layers[l].weights(), &delta)?;
            let act = mode.resolve(layers[l - 1].activation());
            let z = &trace.preactivations[l - 1];
            let next = Vector::new(
                (0..z.len())
                    .map(|u| act.deriv_at(u, z[u]) * carried[u])
                    .collect(),
            );
            biases.push(std::mem::replace(&mut delta, next));
        } else {
            biases.push(std::mem::take(&mut delta));
        }
    }
    weights.reverse();
    biases.reverse();
    Ok(GradientSet { weights, biases })
}

/// Forward then backward for one sample.
pub fn sample_gradient(net: &Network, sample: &LabeledSample, mode: ThresholdMode) -> Result<GradientSet> {
    let trace = net.forward_with(&sample.input, mode)?;
    backward_with(net, &trace, &sample.target, mode)
}

pub fn sample_cost(net: &Network, sample: &LabeledSample) -> Result<f64> {
    cost(&net.output(&sample.input)?, &sample.target)
}

fn param_mut(net: &mut Network, mut index: usize) -> &mut f64 {
    let k = net.layers().len();
    for l in 0..k {
        let n = net.layers()[l].weights().as_slice().len();
        if index < n {
            return &mut net.layer_mut(l).weights_mut().as_mut_slice()[index];
        }
        index -= n;
    }
    for l in 0..k {
        let n = net.layers()[l].biases().len();
        if index < n {
            return &mut net.layer_mut(l).biases_mut().as_mut_slice()[index];
        }
        index -= n;
    }
    panic!("parameter index out of range");
}

fn unflatten(net: &Network, flat: &[f64]) -> GradientSet {
    let mut g = GradientSet::zeros_like(net);
    let mut rest = flat;
    for s in g.slices_mut() {
        let (head, tail) = rest.split_at(s.len());
        s.copy_from_slice(head);
        rest = tail;
    }
    g
}

/// Which neurons sit at or below their threshold for this input.
fn cut_pattern(net: &Network, trace: &ForwardTrace) -> Vec<bool> {
    net.layers()
        .iter()
        .zip(&trace.preactivations)
        .flat_map(|(layer, z)| {
            z.iter()
                .enumerate()
                .map(move |(j, &x)| layer.activation().is_cut(j, x))
        })
        .collect()
}

struct Perturbed {
    derivative: f64,
    crosses_threshold: bool,
}

fn central_differences(net: &Network, sample: &LabeledSample, h: f64) -> Result<Vec<Perturbed>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let base = cut_pattern(net, &net.forward(&sample.input)?);
    let mut probe = net.clone();
    let n = net.param_count().total();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let original = *param_mut(&mut probe, i);

        *param_mut(&mut probe, i) = original + h;
        let plus = probe.forward(&sample.input)?;
        let c_plus = cost(plus.output(), &sample.target)?;
        let crosses_plus = cut_pattern(&probe, &plus) != base;

        *param_mut(&mut probe, i) = original - h;
        let minus = probe.forward(&sample.input)?;
        let c_minus = cost(minus.output(), &sample.target)?;
        let crosses_minus = cut_pattern(&probe, &minus) != base;

        *param_mut(&mut probe, i) = original;
        out.push(Perturbed {
            derivative: (c_plus - c_minus) / (2.0 * h),
            crosses_threshold: crosses_plus || crosses_minus,
        });
    }
    Ok(out)
}

/// Numerical gradient: each parameter perturbed by `±h` in turn, the cost
/// re-evaluated, and the central difference taken.
pub fn finite_diff_gradient(net: &Network, sample: &LabeledSample, h: f64) -> Result<GradientSet> {
    let d: Vec<f64> = central_differences(net, sample, h)?
        .into_iter()
        .map(|p| p.derivative)
        .collect();
    Ok(unflatten(net, &d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    /// `‖g_bp − g_fd‖∞ / max(1, ‖g_fd‖∞)` over the compared entries.
    pub max_relative_error: f64,
    /// Flatten index of the worst entry.
    pub worst_index: Option<usize>,
    pub compared: usize,
    /// Entries skipped because a `±h` perturbation moved some neuron across
    /// its threshold.
    pub excluded: usize,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    /// Compares two flattened gradients, skipping entries where `skip` is true.
    pub fn compare(analytic: &Vector, numeric: &Vector, skip: &[bool], tolerance: f64) -> Self {
        let keep = |i: usize| !skip.get(i).copied().unwrap_or(false);
        let scale = numeric
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .fold(0.0f64, |m, (_, x)| m.max(x.abs()))
            .max(1.0);
        let mut worst: Option<(usize, f64)> = None;
        let mut compared = 0;
        for (i, (a, n)) in analytic.iter().zip(numeric.iter()).enumerate() {
            if !keep(i) {
                continue;
            }
            compared += 1;
            let diff = (a - n).abs();
            if worst.is_none_or(|(_, w)| diff > w || diff.is_nan()) {
                worst = Some((i, diff));
            }
        }
        let max_relative_error = worst.map_or(0.0, |(_, d)| d / scale);
        CheckReport {
            max_relative_error,
            worst_index: worst.map(|(i, _)| i),
            compared,
            excluded: analytic.len() - compared,
            tolerance,
            passed: max_relative_error <= tolerance,
        }
    }
}

/// Backward pass against central differences on one sample.
pub fn gradient_check(net: &Network, sample: &LabeledSample, h: f64, tolerance: f64) -> Result<CheckReport> {
    let analytic = sample_gradient(net, sample, ThresholdMode::AsStored)?.flatten();
    let probes = central_differences(net, sample, h)?;
    let numeric = Vector::new(probes.iter().map(|p| p.derivative).collect());
    let skip: Vec<bool> = probes.iter().map(|p| p.crosses_threshold).collect();
    Ok(CheckReport::compare(&analytic, &numeric, &skip, tolerance))
}

/// A network initialised from `seed` plus one sample whose inputs and
/// targets are uniform on `[0, 1)`, drawn from stream 1 of the same seed.
pub fn seeded_case(shape: &NetworkShape, activations: &[ActivationKind], seed: u64) -> Result<(Network, LabeledSample)> {
    let net = Network::init(shape, activations, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let input = (0..shape.input_width()).map(|_| rng.random::<f64>()).collect();
    let target = (0..shape.output_width()).map(|_| rng.random::<f64>()).collect();
    Ok((net, LabeledSample::new(Vector::new(input), Vector::new(target))))
}
