pub mod baselines;
pub mod config;
pub mod error;
pub mod exact;
pub mod fast;
pub mod graph;
pub mod greedy;
pub mod harness;
pub mod hull;
pub mod netgen;
pub mod rng;
pub mod sketch;
pub mod stats;

pub use config::Tolerances;
pub use error::{Error, Result};
