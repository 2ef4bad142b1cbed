//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by topology loading, community detection, simulation
/// configuration, and experiment plumbing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("topology: {0}")]
    Topology(String),

    #[error("community detection: {0}")]
    Community(String),

    #[error("cache: {0}")]
    Cache(String),

    #[error("policy: {0}")]
    Policy(String),

    #[error("config: {0}")]
    Config(String),

    #[error("experiment: {0}")]
    Experiment(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
