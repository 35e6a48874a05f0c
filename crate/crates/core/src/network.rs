//! Layered parameter storage and the forward pass.
//!
//! Layer `l` maps width `n_l` to `n_{l+1}`: its weight matrix is
//! `n_{l+1} x n_l` with entry `(j, u)` connecting neuron `u` of layer `l` to
//! neuron `j` of layer `l+1`, and `z = W a + b`, `a' = σ(z)` entrywise.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::tensor::{self, Matrix, Vector};

/// Layer widths `n_0, ..., n_k`, input first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkShape(Vec<usize>);

impl NetworkShape {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "need an input and an output layer, got {} width(s)",
                widths.len()
            )));
        }
        if let Some(i) = widths.iter().position(|&w| w == 0) {
            return Err(Error::InvalidShape(format!("layer {i} has zero width")));
        }
        Ok(NetworkShape(widths))
    }

    /// Parses `784,16,16,10`.
    pub fn parse(s: &str) -> Result<Self> {
        let widths = s
            .split(',')
            .map(|w| {
                w.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidShape(format!("`{w}` is not a layer width")))
            })
            .collect::<Result<Vec<_>>>()?;
        NetworkShape::new(widths)
    }

    pub fn widths(&self) -> &[usize] {
        &self.0
    }

    pub fn input_width(&self) -> usize {
        self.0[0]
    }

    pub fn output_width(&self) -> usize {
        *self.0.last().unwrap()
    }

    /// Number of weight layers `k`.
    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    pub fn param_count(&self) -> ParamCount {
        param_count(self)
    }
}

impl fmt::Display for NetworkShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|w| w.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamCount {
    pub wt: usize,
    pub biases: usize,
}

impl ParamCount {
    pub fn total(&self) -> usize {
        self.wt + self.biases
    }
}

/// `wt = Σ n_l n_{l+1}`, `biases = Σ_{l≥1} n_l`.
pub fn param_count(shape: &NetworkShape) -> ParamCount {
    let w = shape.widths();
    ParamCount {
        wt: w.windows(2).map(|p| p[0] * p[1]).sum(),
        biases: w[1..].iter().sum(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    weights: Matrix,
    biases: Vector,
    activation: ActivationKind,
}

impl LayerParams {
    pub fn new(weights: Matrix, biases: Vector, activation: ActivationKind) -> Result<Self> {
        if biases.len() != weights.rows() {
            return Err(Error::shape(
                "layer",
                format!("weights {}", weights.dims()),
                format!("{} biases", biases.len()),
            ));
        }
        activation.check_width(weights.rows())?;
        Ok(LayerParams {
            weights,
            biases,
            activation,
        })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut Matrix {
        &mut self.weights
    }

    pub fn biases(&self) -> &Vector {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut Vector {
        &mut self.biases
    }

    pub fn activation(&self) -> &ActivationKind {
        &self.activation
    }

    pub fn set_activation(&mut self, activation: ActivationKind) -> Result<()> {
        activation.check_width(self.weights.rows())?;
        self.activation = activation;
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    /// `W a + b`.
    pub fn preactivation(&self, input: &Vector) -> Result<Vector> {
        tensor::matvec(&self.weights, input)?.add(&self.biases)
    }
}

/// Whether thresholded layers cut at their `ε` or behave as their base
/// nonlinearity. Training may run either way; evaluation uses `AsStored`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    #[default]
    AsStored,
    Unthresholded,
}

impl ThresholdMode {
    pub(crate) fn resolve<'a>(
        self,
        kind: &'a ActivationKind,
    ) -> std::borrow::Cow<'a, ActivationKind> {
        match self {
            ThresholdMode::AsStored => std::borrow::Cow::Borrowed(kind),
            ThresholdMode::Unthresholded => std::borrow::Cow::Owned(kind.without_threshold()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    shape: NetworkShape,
    layers: Vec<LayerParams>,
}

impl Network {
    /// Uniform `[-1/√n_l, 1/√n_l]` weights for layer `l`, zero biases.
    /// The same seed always gives the same bits.
    pub fn init(shape: &NetworkShape, activations: &[ActivationKind], seed: u64) -> Result<Self> {
        if activations.len() != shape.depth() {
            return Err(Error::InvalidConfig(format!(
                "{} activations given for {} layers",
                activations.len(),
                shape.depth()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = shape
            .widths()
            .windows(2)
            .zip(activations)
            .map(|(p, act)| {
                let (fan_in, fan_out) = (p[0], p[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let w = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-bound..=bound))
                    .collect();
                LayerParams::new(
                    Matrix::from_row_major(fan_out, fan_in, w)?,
                    Vector::zeros(fan_out),
                    act.clone(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Network {
            shape: shape.clone(),
            layers,
        })
    }

    pub fn from_layers(layers: Vec<LayerParams>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::InvalidShape("network has no layers".into()))?;
        let mut widths = vec![first.inputs()];
        for (l, layer) in layers.iter().enumerate() {
            let prev = *widths.last().unwrap();
            if layer.inputs() != prev {
                return Err(Error::shape(
                    "network layers",
                    format!("layer {l} expects {} inputs", layer.inputs()),
                    format!("previous width {prev}"),
                ));
            }
            widths.push(layer.outputs());
        }
        Ok(Network {
            shape: NetworkShape::new(widths)?,
            layers,
        })
    }

    pub fn shape(&self) -> &NetworkShape {
        &self.shape
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layer_mut(&mut self, l: usize) -> &mut LayerParams {
        &mut self.layers[l]
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut LayerParams> {
        self.layers.iter_mut()
    }

    pub fn param_count(&self) -> ParamCount {
        param_count(&self.shape)
    }

    pub fn activations(&self) -> Vec<ActivationKind> {
        self.layers.iter().map(|l| l.activation.clone()).collect()
    }

    /// All weights layer by layer (row-major), then all biases layer by layer.
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count().total());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
        }
        for l in &self.layers {
            out.extend_from_slice(l.biases.as_slice());
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.biases.is_finite())
    }

    pub fn forward(&self, input: &Vector) -> Result<ForwardTrace> {
        self.forward_with(input, ThresholdMode::AsStored)
    }

    pub fn forward_with(&self, input: &Vector, mode: ThresholdMode) -> Result<ForwardTrace> {
        if input.len() != self.shape.input_width() {
            return Err(Error::shape(
                "forward",
                format!("network input width {}", self.shape.input_width()),
                format!("input of length {}", input.len()),
            ));
        }
        let mut preactivations = Vec::with_capacity(self.layers.len());
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.clone());
        for layer in &self.layers {
            let z = layer.preactivation(activations.last().unwrap())?;
            let a = tensor::map(&mode.resolve(&layer.activation), &z)?;
            preactivations.push(z);
            activations.push(a);
        }
        Ok(ForwardTrace {
            preactivations,
            activations,
        })
    }

    /// Output activations only.
    pub fn output(&self, input: &Vector) -> Result<Vector> {
        let mut trace = self.forward(input)?;
        Ok(trace.activations.pop().unwrap())
    }

    /// Index of the largest output, lowest index on ties.
    pub fn predict(&self, input: &Vector) -> Result<usize> {
        Ok(predict_from_outputs(&self.output(input)?))
    }
}

pub fn predict_from_outputs(outputs: &Vector) -> usize {
    outputs.argmax().unwrap_or(0)
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// `z` for layers 1..=k.
    pub preactivations: Vec<Vector>,
    /// `a` for layers 0..=k; `activations[0]` is the input.
    pub activations: Vec<Vector>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Vector {
        self.activations.last().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(n: usize) -> Vec<ActivationKind> {
        vec![ActivationKind::sigmoid(); n]
    }

    /// Counts edges and non-input nodes by walking the layered graph.
    fn enumerate_params(widths: &[usize]) -> (usize, usize) {
        let mut edges = 0;
        let mut nodes = 0;
        for l in 0..widths.len() - 1 {
            for _j in 0..widths[l + 1] {
                nodes += 1;
                for _u in 0..widths[l] {
                    edges += 1;
                }
            }
        }
        (edges, nodes)
    }

    #[test]
    fn param_count_examples() {
        let s = NetworkShape::new(vec![784, 16, 16, 10]).unwrap();
        assert_eq!(enumerate_params(s.widths()), (12960, 42));
        assert_eq!(param_count(&s), ParamCount { wt: 12960, biases: 42 });

        let s = NetworkShape::new(vec![3, 2, 1]).unwrap();
        assert_eq!(enumerate_params(s.widths()), (8, 3));
        assert_eq!(param_count(&s), ParamCount { wt: 8, biases: 3 });

        for (n, m) in [(1, 1), (7, 3), (10, 20)] {
            let s = NetworkShape::new(vec![n, m]).unwrap();
            assert_eq!(param_count(&s), ParamCount { wt: n * m, biases: m });
        }
    }

    #[test]
    fn shape_validation() {
        assert!(NetworkShape::new(vec![5]).is_err());
        assert!(NetworkShape::new(vec![]).is_err());
        assert!(NetworkShape::new(vec![3, 0, 1]).is_err());
        assert!(NetworkShape::parse("3,x").is_err());
        assert_eq!(NetworkShape::parse("784, 16,10").unwrap().widths(), &[784, 16, 10]);
    }

    #[test]
    fn init_is_deterministic() {
        let s = NetworkShape::new(vec![2, 1]).unwrap();
        let a = Network::init(&s, &sig(1), 7).unwrap();
        let b = Network::init(&s, &sig(1), 7).unwrap();
        let bits = |n: &Network| n.flatten_params().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = Network::init(&s, &sig(1), 8).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn init_respects_fan_in_bound_and_zero_biases() {
        let s = NetworkShape::new(vec![3, 2, 1]).unwrap();
        let net = Network::init(&s, &sig(2), 1).unwrap();
        let pc = net.param_count();
        assert_eq!((pc.wt, pc.biases), (8, 3));
        for (l, layer) in net.layers().iter().enumerate() {
            let bound = 1.0 / (s.widths()[l] as f64).sqrt();
            assert!(layer.weights().as_slice().iter().all(|w| w.abs() <= bound));
            assert!(layer.biases().iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn init_rejects_bad_activation_count() {
        let s = NetworkShape::new(vec![3, 2, 1]).unwrap();
        assert!(Network::init(&s, &sig(1), 0).is_err());
    }

    #[test]
    fn forward_identity_network() {
        let layer = LayerParams::new(Matrix::identity(2), Vector::zeros(2), ActivationKind::identity())
            .unwrap();
        let net = Network::from_layers(vec![layer]).unwrap();
        let t = net.forward(&Vector::new(vec![0.2, 0.9])).unwrap();
        assert_eq!(t.output().as_slice(), &[0.2, 0.9]);
    }

    #[test]
    fn forward_hand_evaluation() {
        let layer = LayerParams::new(
            Matrix::from_rows(&[&[1.0, 1.0]]).unwrap(),
            Vector::new(vec![-2.0]),
            ActivationKind::sigmoid(),
        )
        .unwrap();
        let net = Network::from_layers(vec![layer]).unwrap();
        let t = net.forward(&Vector::new(vec![1.0, 1.0])).unwrap();
        assert_eq!(t.preactivations[0].as_slice(), &[0.0]);
        assert_eq!(t.output().as_slice(), &[0.5]);
    }

    #[test]
    fn forward_threshold_branch() {
        let layer = LayerParams::new(
            Matrix::from_rows(&[&[1.0]]).unwrap(),
            Vector::zeros(1),
            ActivationKind::thresholded_sigmoid(0.0).unwrap(),
        )
        .unwrap();
        let net = Network::from_layers(vec![layer]).unwrap();
        let t = net.forward(&Vector::new(vec![-3.0])).unwrap();
        assert_eq!(t.output().as_slice(), &[0.0]);
        let t = net
            .forward_with(&Vector::new(vec![-3.0]), ThresholdMode::Unthresholded)
            .unwrap();
        assert!(t.output()[0] > 0.0);
    }

    #[test]
    fn forward_rejects_wrong_input_width() {
        let s = NetworkShape::new(vec![3, 2]).unwrap();
        let net = Network::init(&s, &sig(1), 0).unwrap();
        assert!(matches!(
            net.forward(&Vector::zeros(2)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn trace_consistency_and_range() {
        let s = NetworkShape::new(vec![4, 5, 3, 2]).unwrap();
        let acts = vec![
            ActivationKind::sigmoid(),
            ActivationKind::thresholded_sigmoid(0.1).unwrap(),
            ActivationKind::sigmoid(),
        ];
        let net = Network::init(&s, &acts, 3).unwrap();
        let input = Vector::new(vec![0.1, 0.7, 0.3, 0.9]);
        let t = net.forward(&input).unwrap();
        assert_eq!(t, net.forward(&input).unwrap());
        for (l, layer) in net.layers().iter().enumerate() {
            let z = &t.preactivations[l];
            let a = &t.activations[l + 1];
            assert_eq!(a.len(), s.widths()[l + 1]);
            for j in 0..z.len() {
                assert_eq!(a[j], layer.activation().eval_at(j, z[j]));
                assert!(a[j] == 0.0 && layer.activation().is_thresholded() || (a[j] > 0.0 && a[j] < 1.0));
            }
        }
    }

    #[test]
    fn predict_examples() {
        assert_eq!(predict_from_outputs(&Vector::new(vec![0.1, 0.9])), 1);
        assert_eq!(predict_from_outputs(&Vector::new(vec![0.5, 0.5])), 0);
        let digit8 = Vector::new(vec![0.4, 0.7, 0.2, 0.1, 0.0, 0.4, 1.0, 0.1, 0.0, 0.3]);
        assert_eq!(predict_from_outputs(&digit8), 6);
    }

    #[test]
    fn from_layers_rejects_mismatched_widths() {
        let a = LayerParams::new(Matrix::zeros(3, 2), Vector::zeros(3), ActivationKind::sigmoid()).unwrap();
        let b = LayerParams::new(Matrix::zeros(1, 2), Vector::zeros(1), ActivationKind::sigmoid()).unwrap();
        assert!(Network::from_layers(vec![a, b]).is_err());
    }
}
