use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Time-stepping settings shared by all solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SolverConfig {
    /// Base step; cells between breakpoints are at most this long.
    pub h: f64,
    /// Gauss order for integrands of unknown degree.
    pub quad_order: usize,
    /// Per-step fixed-point tolerance (relative to `1 + |x|`).
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Put every propagated breakpoint on the grid.
    pub align_breakpoints: bool,
    /// Accept a node where a kernel atom meets the truncation boundary of
    /// the forced route; otherwise such a node is an error.
    pub allow_boundary_atoms: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 1e-3,
            quad_order: 5,
            picard_tol: 1e-13,
            picard_max: 50,
            align_breakpoints: true,
            allow_boundary_atoms: true,
        }
    }
}

impl SolverConfig {
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidConfig(format!("step h must be positive, got {}", self.h)));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::InvalidConfig("picardTol must be positive".into()));
        }
        if self.picard_max < 1 {
            return Err(Error::InvalidConfig("picardMax must be at least 1".into()));
        }
        if self.quad_order < 1 {
            return Err(Error::InvalidConfig("quadOrder must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn h_as<T: Real>(&self) -> T {
        T::lit(self.h)
    }

    /// Fixed-point tolerance, never below what the scalar type resolves.
    pub(crate) fn tol_as<T: Real>(&self) -> T {
        T::lit(self.picard_tol).max(T::epsilon() * T::lit(8.0))
    }
}

pub(crate) fn check_horizon<T: Real>(horizon: T) -> Result<()> {
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "horizon must be positive, got {}",
            horizon.to_f64_lossy()
        )));
    }
    Ok(())
}
