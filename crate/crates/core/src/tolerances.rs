use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds used across the certification pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Allowed deviation of the squared norm from 1.
    pub norm_tol: f64,
    /// Minimum gap between squared Schmidt coefficients to call them distinct.
    pub gap_tol: f64,
    /// Relative singular-value threshold for the null-space decision.
    pub svd_tol: f64,
    /// Per-marginal Frobenius tolerance for deck equality.
    pub deck_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm_tol: crate::state::DEFAULT_NORM_TOL,
            gap_tol: crate::schmidt::DEFAULT_GAP_TOL,
            svd_tol: crate::udp::DEFAULT_SVD_TOL,
            deck_tol: crate::marginal::DEFAULT_DECK_TOL,
        }
    }
}

impl Tolerances {
    /// Every tolerance must lie in `(0, 1e-2)`.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("norm_tol", self.norm_tol),
            ("gap_tol", self.gap_tol),
            ("svd_tol", self.svd_tol),
            ("deck_tol", self.deck_tol),
        ] {
            if !(v > 0.0 && v < 1e-2) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {v} is outside (0, 1e-2)"
                )));
            }
        }
        Ok(())
    }
}
