use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity residual bound.
    pub eps_herm: f64,
    /// Allowed magnitude of a negative eigenvalue in a PSD check.
    pub eps_psd: f64,
    /// Relative commutator bound.
    pub eps_comm: f64,
    /// Reconstruction bound.
    pub eps_recon: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub eps_rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_herm: 1e-10,
            eps_psd: 1e-9,
            eps_comm: 1e-8,
            eps_recon: 1e-8,
            eps_rank: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eps_herm", self.eps_herm),
            ("eps_psd", self.eps_psd),
            ("eps_comm", self.eps_comm),
            ("eps_recon", self.eps_recon),
            ("eps_rank", self.eps_rank),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::BadTolerances(format!("{name} = {v} not in (0, 1)")));
            }
        }
        Ok(())
    }
}
