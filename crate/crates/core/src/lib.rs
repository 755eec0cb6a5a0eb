//! Parallel online belief propagation for latent Dirichlet allocation.
//!
//! Generic over the floating-point type; the aliases below fix it to `f64`.

pub mod cluster;
pub mod config;
pub mod corpus;
pub mod error;
pub mod inference;
pub mod model_io;
pub mod report;
mod rng;
pub mod scalar;
pub mod scheduler;

pub use config::RunConfig;
pub use corpus::{Entry, MiniBatch, Shard, SparseCorpus};
pub use error::{Error, ErrorKind, Result};
pub use scalar::Real;

pub type Stats = inference::GlobalStats<f64>;
pub type Theta = inference::ThetaStats<f64>;
pub type Messages = inference::MessageBlock<f64>;
pub type Phi = inference::TopicWordDist<f64>;
pub type Hyper = inference::Hyperparams<f64>;
pub type Config = cluster::EngineConfig<f64>;
pub type Model = cluster::TrainedModel<f64>;
pub type Output = cluster::RunOutput<f64>;
pub type Payload = cluster::SyncPayload<f64>;
pub type Worker = cluster::WorkerState<f64>;
