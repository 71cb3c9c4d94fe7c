use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every routine in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative singular-value cutoff for ranks, nullspaces and eigenvalue collisions.
    pub rank_tol: f64,
    /// Frobenius spacing of the closure ε-net.
    pub closure_eps: f64,
    /// Target for `‖Q² − Q‖_F`.
    pub idempotent_tol: f64,
    /// Cauchy tolerance for sequences of averages and subspaces.
    pub convergence_tol: f64,
    pub max_iterations: usize,
    /// Eigenvalues with modulus at least this belong to the reversible part.
    pub spectral_boundary: f64,
    /// Operator norm above which a word is taken as evidence of unbounded powers.
    pub norm_cap: f64,
    /// Element cap for closure saturation.
    pub max_net_size: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            closure_eps: 1e-4,
            idempotent_tol: 1e-10,
            convergence_tol: 1e-8,
            max_iterations: 200_000,
            spectral_boundary: 0.99,
            norm_cap: 1e4,
            max_net_size: 1000,
        }
    }
}

impl Tolerances {
    /// Named profiles: `default`, `strict`, `loose`.
    pub fn profile(name: &str) -> Result<Self> {
        let base = Self::default();
        match name {
            "default" => Ok(base),
            "strict" => Ok(Self {
                rank_tol: 1e-10,
                idempotent_tol: 1e-12,
                convergence_tol: 1e-10,
                max_iterations: 1_000_000,
                ..base
            }),
            "loose" => Ok(Self {
                rank_tol: 1e-6,
                closure_eps: 1e-3,
                idempotent_tol: 1e-8,
                convergence_tol: 1e-6,
                max_iterations: 50_000,
                ..base
            }),
            other => Err(Error::MalformedParameters(format!(
                "unknown tolerance profile `{other}`"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rank_tol", self.rank_tol),
            ("closure_eps", self.closure_eps),
            ("idempotent_tol", self.idempotent_tol),
            ("convergence_tol", self.convergence_tol),
            ("norm_cap", self.norm_cap),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::MalformedParameters(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.spectral_boundary > 0.0 && self.spectral_boundary < 1.0) {
            return Err(Error::MalformedParameters(format!(
                "spectral_boundary must lie in (0, 1), got {}",
                self.spectral_boundary
            )));
        }
        if self.max_iterations == 0 || self.max_net_size == 0 {
            return Err(Error::MalformedParameters(
                "iteration budgets must be positive".into(),
            ));
        }
        Ok(())
    }
}
