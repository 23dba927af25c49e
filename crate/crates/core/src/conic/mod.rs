//! Block-diagonal semidefinite programs: the backend contract, the
//! reference interior point method and SDPA text I/O.
//!
//! Problems come from [`crate::relax::SdpProblem`] in the form
//! `minimize <C, X> + c^T x  s.t.  <A_i, X> + B_i x = b_i,  X >= 0`
//! with `x` free. Exact data is rounded to `f64` here and nowhere earlier.

mod ipm;
mod sdpa;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::relax::SdpProblem;

pub use ipm::InteriorPoint;
pub use sdpa::{export_sdpa, import_sdpa};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub backend: String,
    /// Print the iteration log to stderr as it is produced.
    #[serde(default)]
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 100,
            backend: "ipm".into(),
            verbose: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "solver tolerance must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_usable(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

/// Relative residuals at the returned iterate, plus replay quantities on
/// the unscaled data.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal_eq: f64,
    pub dual_eq: f64,
    pub duality_gap: f64,
    pub min_eigenvalue: f64,
    /// `max_i |<A_i, X> + B_i x - b_i|` on the original rows.
    pub max_abs_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub gap: f64,
    pub mu: f64,
    pub sigma: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub backend: String,
    pub block_labels: Vec<String>,
    pub block_values: Vec<SymMatrix<f64>>,
    pub scalar_names: Vec<String>,
    pub scalars: Vec<f64>,
    /// Multipliers of the original constraint rows (zero for rows dropped
    /// as linearly dependent).
    pub dual: Vec<f64>,
    /// `<C, X> + c^T x + constant`.
    pub objective_value: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub dropped_rows: Vec<usize>,
    pub iterations: Vec<IterationLog>,
    pub message: String,
}

impl SdpSolution {
    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalar_names
            .iter()
            .position(|s| s == name)
            .map(|i| self.scalars[i])
    }

    pub fn block(&self, label: &str) -> Option<&SymMatrix<f64>> {
        self.block_labels
            .iter()
            .position(|s| s == label)
            .map(|i| &self.block_values[i])
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("solution serializes")
    }
}

/// A solver for [`SdpProblem`]s.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, problem: &SdpProblem, config: &SolverConfig) -> Result<SdpSolution>;
}

/// Identifiers accepted by [`backend`].
pub const BACKENDS: &[&str] = &["ipm"];

pub fn backend(id: &str) -> Result<Box<dyn Backend>> {
    match id {
        "ipm" => Ok(Box::new(InteriorPoint)),
        other => Err(Error::UnknownBackend(other.into())),
    }
}

pub fn solve(problem: &SdpProblem, config: &SolverConfig) -> Result<SdpSolution> {
    config.validate()?;
    problem.validate()?;
    backend(&config.backend)?.solve(problem, config)
}
