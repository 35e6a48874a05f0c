//! Dense feedforward networks trained by backpropagation, with threshold
//! activations and magnitude pruning for sparse inference.
//!
//! The pieces compose as a pipeline:
//!
//! 1. [`network::Network::init`] builds a seeded network from a
//!    [`network::NetworkShape`] and per-layer [`activation::ActivationKind`]s.
//! 2. [`optimize::train`] fits it with full-batch, stochastic or minibatch
//!    gradient descent, optionally with momentum and adaptive rates.
//! 3. [`sparsity::prune_to_target`] and [`sparsity::calibrate_epsilon`]
//!    introduce weight and activation sparsity; [`sparsity::retrain`] keeps
//!    pruned weights frozen at zero.
//! 4. [`model_io`] persists the result bit-exactly.
//!
//! ```
//! use snn_core::{ActivationKind, Network, NetworkShape, Vector};
//!
//! let shape = NetworkShape::parse("2,3,2").unwrap();
//! let net = Network::init(&shape, &[ActivationKind::sigmoid(), ActivationKind::sigmoid()], 7).unwrap();
//! let class = net.predict(&Vector::new(vec![0.1, 0.9])).unwrap();
//! assert!(class < 2);
//! ```

pub mod activation;
pub mod backprop;
pub mod data;
pub mod error;
pub mod model_io;
pub mod network;
pub mod optimize;
pub mod sparsity;
pub mod tensor;

pub use activation::{ActivationKind, ActivationTag, Epsilon};
pub use backprop::{GradientSet, LabeledSample};
pub use data::{DataSource, Dataset, SynthKind};
pub use error::{Error, Result};
pub use network::{Network, NetworkShape, ThresholdMode};
pub use optimize::{Method, OptimizerConfig, TrainingHistory};
pub use sparsity::{PruneMask, SparsityReport};
pub use tensor::{Matrix, Vector};
