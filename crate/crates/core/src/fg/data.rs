use serde::Serialize;

use crate::error::{FgError, Result};
use crate::field::ScalarField;
use crate::geometry::boundary::boundary_connection;
use crate::geometry::operators::divergence;
use crate::geometry::SymTensor;
use crate::symform::SymForm;

/// Boundary metric `γ`, free third-order coefficient `σ`, and truncation
/// order `K ≥ 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub gamma: SymForm,
    pub sigma: SymForm,
    pub order: usize,
}

impl BoundaryData {
    pub fn new(gamma: SymForm, sigma: SymForm, order: usize) -> Result<Self> {
        if order < 3 {
            return Err(FgError::InvalidParameter(format!(
                "truncation order must be at least 3, got {order}"
            )));
        }
        if gamma.grid() != sigma.grid() {
            return Err(FgError::GridMismatch {
                left: gamma.grid().n_points(),
                right: sigma.grid().n_points(),
            });
        }
        gamma.check_positive_definite()?;
        Ok(Self {
            gamma,
            sigma,
            order,
        })
    }
}

/// Sup norms of `tr_γ σ` and `δ_γ σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TtReport {
    pub trace_norm: f64,
    pub divergence_norm: f64,
}

/// `tr_γ σ` as a field.
pub fn tt_trace(gamma: &SymForm, sigma: &SymForm) -> Result<ScalarField> {
    Ok(sigma.contract(&gamma.inverse()?))
}

/// `(δ_γ σ)_j = −γ^{ik}∇_i σ_{kj}`.
pub fn tt_divergence(gamma: &SymForm, sigma: &SymForm) -> Result<[ScalarField; 3]> {
    let conn = boundary_connection(gamma)?;
    let div = divergence(&conn, &SymTensor::from_symform(sigma));
    Ok(std::array::from_fn(|j| div[j].coeff(0).clone()))
}

/// Measure how far `σ` is from transverse-traceless with respect to `γ`.
pub fn tt_report(gamma: &SymForm, sigma: &SymForm) -> Result<TtReport> {
    let trace_norm = tt_trace(gamma, sigma)?.sup_norm();
    let divergence_norm = tt_divergence(gamma, sigma)?
        .iter()
        .map(|f| f.sup_norm())
        .fold(0.0, f64::max);
    Ok(TtReport {
        trace_norm,
        divergence_norm,
    })
}

/// Accept `σ` if both `tr_γσ` and `δ_γσ` are within `tol`.
pub fn validate_tt(gamma: &SymForm, sigma: &SymForm, tol: f64) -> Result<TtReport> {
    let r = tt_report(gamma, sigma)?;
    if r.trace_norm > tol || r.divergence_norm > tol {
        return Err(FgError::ConstraintViolation {
            trace_norm: r.trace_norm,
            divergence_norm: r.divergence_norm,
            obstruction_norm: 0.0,
        });
    }
    Ok(r)
}
