use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by the solver and the audits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Sup-norm bound on `tr_γ σ` and `δ_γ σ`.
    pub tt_tol: f64,
    /// Per-order bound on audited Einstein residual coefficients.
    pub residual_tol: f64,
    /// Relative singular-value threshold separating kernel from range.
    pub rank_threshold: f64,
    /// Bound on the negative-order coefficients that must cancel.
    pub cancellation_tol: f64,
    /// Bound on the defect of the affine probe model.
    pub affinity_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tt_tol: 1e-10,
            residual_tol: 1e-9,
            rank_threshold: 1e-8,
            cancellation_tol: 1e-10,
            affinity_tol: 1e-10,
        }
    }
}
