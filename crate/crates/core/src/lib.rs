//! Fraud detection with an autoencoder anomaly scorer, binary bat feature
//! selection, class rebalancing, and evaluation metrics.

pub mod autoenc;
pub mod baselines;
pub mod batopt;
pub mod dataio;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod neural;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;
