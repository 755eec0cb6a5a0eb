//! Numerical core of online belief propagation for LDA.
//!
//! Topic-word matrices are stored word-major (`W` rows of `K`), so the
//! per-entry message update touches one contiguous row.

mod memory;
mod messages;
mod perplexity;
mod stats;
mod update;

pub use memory::{MeterGuard, StorageMeter};
pub use messages::{init_messages, MessageBlock};
pub use perplexity::{
    fold_in_corpus, fold_in_theta, perplexity_gap, predictive_perplexity, FoldIn, TopicWordDist,
};
pub use stats::{accumulate_phi, mean_residual, rebuild_theta, GlobalStats, ThetaStats};
pub use update::{compute_residual, update_message, MessageContext, Topics, UpdateOutcome};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symmetric Dirichlet hyperparameters and the topic count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams<T> {
    pub alpha: T,
    pub beta: T,
    pub num_topics: usize,
}

impl<T: Real> Hyperparams<T> {
    pub fn new(alpha: T, beta: T, num_topics: usize) -> Result<Self> {
        if num_topics == 0 {
            return Err(Error::Config("number of topics must be at least 1".into()));
        }
        if !(alpha > T::zero() && alpha.is_finite()) || !(beta > T::zero() && beta.is_finite()) {
            return Err(Error::Config(format!(
                "alpha and beta must be positive, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            num_topics,
        })
    }

    /// `alpha = 2/K`, `beta = 0.01`.
    pub fn standard(num_topics: usize) -> Result<Self> {
        if num_topics == 0 {
            return Err(Error::Config("number of topics must be at least 1".into()));
        }
        Self::new(T::of(2.0 / num_topics as f64), T::of(0.01), num_topics)
    }
}

/// Stochastic-approximation rate `1/(m-1)` for folding mini-batch `m >= 2`
/// into the accumulated statistics.
pub fn learning_rate(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("learning rate is defined for m >= 2, got {m}")));
    }
    Ok(1.0 / (m - 1) as f64)
}
