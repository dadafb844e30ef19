// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator and its diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate parametrization at node {node}: |dz/dalpha| = {speed:e}")]
    DegenerateParametrization { node: usize, speed: f64 },

    #[error("discrete self-intersection between nodes {first} and {second}")]
    SelfIntersection { first: usize, second: usize },

    #[error("kernel evaluated at its singular point ({x1}, {x2})")]
    SingularPoint { x1: f64, x2: f64 },

    #[error("non-finite value at node {node}")]
    NumericalBlowup { node: usize },

    #[error("step size fell below dt_min = {dt_min:e} at t = {t} (error norm {err:e})")]
    StepFailure { t: f64, dt_min: f64, err: f64 },

    #[error("b-threshold is not bracketed: total({b_lo}) = {total_lo:e}, total({b_hi}) = {total_hi:e}")]
    Bracketing {
        b_lo: f64,
        b_hi: f64,
        total_lo: f64,
        total_hi: f64,
    },

    #[error("turning family violates property {property}: {detail}")]
    Construction { property: String, detail: String },

    #[error("dissipation estimate is negative ({0:e}); series or quadrature is inconsistent")]
    Inconsistent(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
