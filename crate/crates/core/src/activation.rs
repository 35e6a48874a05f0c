//! Scalar nonlinearities and their derivative conventions.
//!
//! The thresholded kinds zero every input at or below their threshold `ε`
//! (closed lower branch), and their derivative there is 0. `relu` is the
//! `ε = 0` member of the `modified-relu` family; `thresholded-sigmoid` is the
//! logistic curve cut to 0 at `ε`, with a jump to `σ(ε)` just above it.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivationTag {
    Identity,
    Sigmoid,
    Relu,
    ModifiedRelu,
    ThresholdedSigmoid,
}

impl ActivationTag {
    pub const ALL: [ActivationTag; 5] = [
        ActivationTag::Identity,
        ActivationTag::Sigmoid,
        ActivationTag::Relu,
        ActivationTag::ModifiedRelu,
        ActivationTag::ThresholdedSigmoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationTag::Identity => "identity",
            ActivationTag::Sigmoid => "sigmoid",
            ActivationTag::Relu => "relu",
            ActivationTag::ModifiedRelu => "modified-relu",
            ActivationTag::ThresholdedSigmoid => "thresholded-sigmoid",
        }
    }

    pub fn needs_epsilon(self) -> bool {
        matches!(
            self,
            ActivationTag::ModifiedRelu | ActivationTag::ThresholdedSigmoid
        )
    }
}

impl FromStr for ActivationTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ActivationTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownActivation(s.to_owned()))
    }
}

impl fmt::Display for ActivationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Threshold of a thresholded layer: one value broadcast to every neuron,
/// or one value per neuron.
#[derive(Debug, Clone, PartialEq)]
pub enum Epsilon {
    Scalar(f64),
    PerNeuron(Vec<f64>),
}

impl Epsilon {
    pub fn at(&self, neuron: usize) -> f64 {
        match self {
            Epsilon::Scalar(e) => *e,
            Epsilon::PerNeuron(v) => v[neuron],
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |e: f64| !(e.is_finite() && e >= 0.0);
        match self {
            Epsilon::Scalar(e) if bad(*e) => Err(Error::InvalidEpsilon(format!(
                "{e} (must be finite and >= 0)"
            ))),
            Epsilon::PerNeuron(v) => match v.iter().position(|&e| bad(e)) {
                Some(i) => Err(Error::InvalidEpsilon(format!(
                    "neuron {i}: {} (must be finite and >= 0)",
                    v[i]
                ))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// An activation tag together with its threshold, when the tag takes one.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationKind {
    tag: ActivationTag,
    epsilon: Option<Epsilon>,
}

impl ActivationKind {
    pub fn new(tag: ActivationTag, epsilon: Option<Epsilon>) -> Result<Self> {
        match (&epsilon, tag.needs_epsilon()) {
            (None, true) => Err(Error::InvalidEpsilon(format!(
                "`{tag}` requires an epsilon"
            ))),
            (Some(_), false) => Err(Error::InvalidEpsilon(format!(
                "`{tag}` does not take an epsilon"
            ))),
            (Some(e), true) => {
                e.validate()?;
                Ok(ActivationKind { tag, epsilon })
            }
            (None, false) => Ok(ActivationKind { tag, epsilon }),
        }
    }

    pub fn identity() -> Self {
        ActivationKind {
            tag: ActivationTag::Identity,
            epsilon: None,
        }
    }

    pub fn sigmoid() -> Self {
        ActivationKind {
            tag: ActivationTag::Sigmoid,
            epsilon: None,
        }
    }

    pub fn relu() -> Self {
        ActivationKind {
            tag: ActivationTag::Relu,
            epsilon: None,
        }
    }

    pub fn modified_relu(epsilon: f64) -> Result<Self> {
        Self::new(ActivationTag::ModifiedRelu, Some(Epsilon::Scalar(epsilon)))
    }

    pub fn modified_relu_per_neuron(epsilon: Vec<f64>) -> Result<Self> {
        Self::new(ActivationTag::ModifiedRelu, Some(Epsilon::PerNeuron(epsilon)))
    }

    pub fn thresholded_sigmoid(epsilon: f64) -> Result<Self> {
        Self::new(
            ActivationTag::ThresholdedSigmoid,
            Some(Epsilon::Scalar(epsilon)),
        )
    }

    pub fn thresholded_sigmoid_per_neuron(epsilon: Vec<f64>) -> Result<Self> {
        Self::new(
            ActivationTag::ThresholdedSigmoid,
            Some(Epsilon::PerNeuron(epsilon)),
        )
    }

    /// Parses a bare tag. Thresholded tags get `default_epsilon`.
    pub fn parse(s: &str, default_epsilon: f64) -> Result<Self> {
        let tag: ActivationTag = s.trim().parse()?;
        let eps = tag
            .needs_epsilon()
            .then_some(Epsilon::Scalar(default_epsilon));
        Self::new(tag, eps)
    }

    pub fn tag(&self) -> ActivationTag {
        self.tag
    }

    pub fn epsilon(&self) -> Option<&Epsilon> {
        self.epsilon.as_ref()
    }

    pub fn is_thresholded(&self) -> bool {
        self.epsilon.is_some()
    }

    /// The same nonlinearity with thresholding switched off: sigmoid for
    /// thresholded-sigmoid, relu for modified-relu.
    pub fn without_threshold(&self) -> Self {
        match self.tag {
            ActivationTag::ThresholdedSigmoid => Self::sigmoid(),
            ActivationTag::ModifiedRelu => Self::relu(),
            _ => self.clone(),
        }
    }

    /// Rejects per-neuron thresholds whose count differs from `width`.
    pub fn check_width(&self, width: usize) -> Result<()> {
        match &self.epsilon {
            Some(Epsilon::PerNeuron(v)) if v.len() != width => Err(Error::shape(
                "per-neuron epsilon",
                format!("{} thresholds", v.len()),
                format!("layer width {width}"),
            )),
            _ => Ok(()),
        }
    }

    #[inline]
    fn threshold(&self, neuron: usize) -> f64 {
        self.epsilon.as_ref().map_or(0.0, |e| e.at(neuron))
    }

    /// Value for neuron `neuron` of the layer (selects its threshold).
    pub fn eval_at(&self, neuron: usize, x: f64) -> f64 {
        match self.tag {
            ActivationTag::Identity => x,
            ActivationTag::Sigmoid => sigmoid(x),
            ActivationTag::Relu => {
                if x <= 0.0 {
                    0.0
                } else {
                    x
                }
            }
            ActivationTag::ModifiedRelu => {
                if x <= self.threshold(neuron) {
                    0.0
                } else {
                    x
                }
            }
            ActivationTag::ThresholdedSigmoid => {
                if x <= self.threshold(neuron) {
                    0.0
                } else {
                    sigmoid(x)
                }
            }
        }
    }

    /// Derivative for neuron `neuron`. At a threshold (and at 0 for relu)
    /// the zero branch is taken.
    pub fn deriv_at(&self, neuron: usize, x: f64) -> f64 {
        match self.tag {
            ActivationTag::Identity => 1.0,
            ActivationTag::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            ActivationTag::Relu => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            ActivationTag::ModifiedRelu => {
                if x <= self.threshold(neuron) {
                    0.0
                } else {
                    1.0
                }
            }
            ActivationTag::ThresholdedSigmoid => {
                if x <= self.threshold(neuron) {
                    0.0
                } else {
                    let s = sigmoid(x);
                    s * (1.0 - s)
                }
            }
        }
    }

    /// Scalar form; a per-neuron threshold is read at neuron 0.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_at(0, x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.deriv_at(0, x)
    }

    /// True when `x` sits at or below this neuron's threshold, i.e. the
    /// output is a hard zero. Always false for unthresholded kinds.
    pub fn is_cut(&self, neuron: usize, x: f64) -> bool {
        self.is_thresholded() && x <= self.threshold(neuron)
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.epsilon {
            None => write!(f, "{}", self.tag),
            Some(Epsilon::Scalar(e)) => write!(f, "{}(eps={e})", self.tag),
            Some(Epsilon::PerNeuron(v)) => write!(f, "{}(eps=[{} values])", self.tag, v.len()),
        }
    }
}
