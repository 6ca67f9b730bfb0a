//! Time integration of the split Dirac–Klein–Gordon system
//!
//! ```text
//! ∂t ψ₊ = −i|D|ψ₊ + iΠ₊F,   ∂t ψ₋ = +i|D|ψ₋ + iΠ₋F,   F = −Mβψ + (Re φ₊)βψ
//! ∂t φ₊ = −i⟨D⟩φ₊ + i⟨D⟩^{-1}(|ψ₁|² − |ψ₂|²)
//! ```
//!
//! with `ψ = ψ₊ + ψ₋` and unit Klein–Gordon mass.

mod dynamics;
mod evolve;
mod picard;
mod state;

pub use dynamics::{Dynamics, Propagator};
pub use evolve::{evolve, evolve_with, observe, ObservableSpec, Sample, Trajectory};
pub use picard::{picard_solve, picard_nodes, PicardReport, PICARD_MAX_N, PICARD_MAX_T};
pub use state::{charge, initial_state, reconstruct, split_initial_data, InitialData, SplitState};

use serde::{Deserialize, Serialize};

use crate::error::{DkgError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    LawsonRk4,
    PicardOracle,
}

/// `Off` drops the whole right-hand side, mass term included, leaving the
/// free half-wave and Klein–Gordon flows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    #[default]
    Full,
    Off,
}

fn default_true() -> bool {
    true
}

fn default_record() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(rename = "M", alias = "mass")]
    pub mass: f64,
    #[serde(default = "default_record")]
    pub record_every: usize,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    /// Turning this off makes every product aliased; kept as a negative control.
    #[serde(default = "default_true")]
    pub dealias: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64, mass: f64) -> Self {
        SolverConfig {
            dt,
            t_end,
            mass,
            record_every: 1,
            integrator: Integrator::LawsonRk4,
            nonlinearity: Nonlinearity::Full,
            dealias: true,
        }
    }

    /// Number of steps, after checking that `t_end` is a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(DkgError::Config(format!("solver.dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(DkgError::Config(format!("solver.t_end must be ≥ 0, got {}", self.t_end)));
        }
        if !self.mass.is_finite() {
            return Err(DkgError::Config("solver.M must be finite".into()));
        }
        if self.record_every == 0 {
            return Err(DkgError::Config("solver.record_every must be ≥ 1".into()));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(DkgError::Config(format!(
                "solver.t_end = {} is not a whole number of steps dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }
}
