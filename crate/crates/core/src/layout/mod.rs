//! Penalized Kamada-Kawai grid layout.
//!
//! The pipeline for one graph: hop distances, a Kamada-Kawai minimization from
//! an initial layout, a second minimization of the Kamada-Kawai energy plus the
//! vertex separation penalty warm-started at the first result, and finally
//! rounding to integer cells.

mod energy;
mod gpgl;
mod grid;
mod init;
mod optimize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use energy::{gpgl_energy, gpgl_gradient, kk_energy, separation_penalty, COINCIDENT_EPS};
pub use gpgl::{gpgl, gpgl_with_distances, vertex_loss_ratio, GpglRun, LossAveraging};
pub use grid::GridLayout;
pub use init::{circular_layout, init_layout, Initialization};
pub use optimize::{minimize, Minimum, Objective, HISTORY};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("non-finite objective or gradient at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("invalid layout configuration: {0}")]
    Config(String),
    #[error("cannot lay out an empty graph")]
    EmptyGraph,
    #[error("{0}")]
    Input(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    #[default]
    Circular,
    Spectral,
    Random,
}

impl std::str::FromStr for InitStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "circular" => Ok(Self::Circular),
            "spectral" => Ok(Self::Spectral),
            "random" => Ok(Self::Random),
            other => Err(format!("unknown init strategy {other:?} (circular|spectral|random)")),
        }
    }
}

impl std::fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Circular => "circular",
            Self::Spectral => "spectral",
            Self::Random => "random",
        })
    }
}

/// Solver settings. `alpha` is the separation threshold and `lambda` the
/// penalty weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub max_iters_kk: usize,
    pub max_iters_gpgl: usize,
    pub grad_tol: f64,
    pub seed: u64,
    pub init: InitStrategy,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            alpha: 1.25,
            lambda: 1000.0,
            max_iters_kk: 500,
            max_iters_gpgl: 1000,
            grad_tol: 1e-4,
            seed: 0,
            init: InitStrategy::Circular,
        }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(SolverError::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(SolverError::Config(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        if self.grad_tol.is_nan() || self.grad_tol <= 0.0 {
            return Err(SolverError::Config(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        Ok(())
    }
}

/// Real-valued vertex positions.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousLayout {
    pub coords: Vec<[f64; 2]>,
    /// Objective value at `coords` for the last minimization (0 before any).
    pub energy: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl ContinuousLayout {
    pub fn new(coords: Vec<[f64; 2]>) -> Self {
        Self { coords, energy: 0.0, converged: false, iterations: 0 }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub(crate) fn flat(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|p| [p[0], p[1]]).collect()
    }

    pub(crate) fn from_flat(x: &[f64]) -> Vec<[f64; 2]> {
        x.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
    }
}
