//! Markov chains, MCMC, Poisson and jump processes, and queues, computed
//! exactly in rational arithmetic where possible and by simulation otherwise.

pub mod absorbing;
pub mod chain;
pub mod distributions;
pub mod error;
pub mod files;
pub mod jump;
pub mod linalg;
pub mod mcmc;
pub mod poisson;
pub mod queueing;
pub mod random_walk;
pub mod scalar;
pub mod stationary;
pub mod stats;
pub mod zoo;

pub use chain::{ChainClassification, Distribution, StochasticMatrix};
pub use distributions::RngStream;
pub use error::{Error, Result};
pub use jump::Generator;
pub use linalg::Matrix;
pub use scalar::{Backend, Rational, Scalar};
