//! Intrinsic curvature of the boundary metric and the boundary identities
//! relating it to the curvature of the compactified bulk metric.

use serde::Serialize;

use crate::error::Result;
use crate::field::ScalarField;
use crate::symform::SymForm;

use super::bulk::BulkMetric;
use super::curvature::Connection;
use super::operators::divergence;
use super::tensor::{Chart, SymTensor};

#[derive(Debug, Clone)]
pub struct Boundary3Curvature {
    pub ricci3: SymForm,
    pub scalar3: ScalarField,
}

/// Levi-Civita connection of a boundary metric (order-0 series).
pub fn boundary_connection(gamma: &SymForm) -> Result<Connection> {
    gamma.check_positive_definite()?;
    Connection::new(Chart::Boundary, &SymTensor::from_symform(gamma))
}

pub fn boundary_curvature(gamma: &SymForm) -> Result<Boundary3Curvature> {
    let conn = boundary_connection(gamma)?;
    let ric = conn.ricci();
    let scalar3 = ric.trace_with(conn.inverse()).coeff(0).clone();
    let ricci3 = SymForm::from_fn(gamma.grid(), |i, j| ric.get(i, j).coeff(0).clone());
    Ok(Boundary3Curvature { ricci3, scalar3 })
}

/// `δ_γ Ric_γ + ½ ds_γ`, the contracted Bianchi defect of the boundary.
pub fn boundary_bianchi_defect(gamma: &SymForm) -> Result<f64> {
    let conn = boundary_connection(gamma)?;
    let ric = conn.ricci();
    let s = ric.trace_with(conn.inverse());
    let div = divergence(&conn, &ric);
    Ok((0..3)
        .map(|i| {
            let mut v = div[i].clone();
            v.axpy(0.5, &s.dx(i + 1));
            v.sup_norm()
        })
        .fold(0.0, f64::max))
}

/// Discrepancies of the boundary identities at `t = 0` for a geodesic-gauge
/// metric with vanishing first-order coefficient (so the boundary mean
/// curvature vanishes).
///
/// With `s̄` the scalar curvature of `ḡ` at the boundary, the tangential
/// identity is checked in two forms:
///
/// * in the short form `Ric̄_{ij} = 2(Ric_γ)_{ij} + ⅙(s̄ − (3/2)s_γ)γ_{ij}`;
/// * as derived for the geodesic gauge, `Ric̄_{ij} = 2(Ric_γ)_{ij} + ⅙(s̄ − 3s_γ)γ_{ij}`.
///
/// The two differ by `(s_γ/4)γ`, reported as `predicted_short_gap`. The
/// mixed identity is `Ric̄_{0i} = 0`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct BoundaryIdentityReport {
    pub tangential_short: f64,
    pub tangential_corrected: f64,
    pub predicted_short_gap: f64,
    pub mixed: f64,
}

pub fn boundary_identities_check(m: &BulkMetric) -> Result<BoundaryIdentityReport> {
    let order = m.order().min(2);
    let trimmed = BulkMetric::new(m.signature(), m.tangential().truncate(order))?;
    let gbar = trimmed.to_tensor();
    let conn = Connection::new(Chart::Bulk, &gbar)?;
    let ric = conn.ricci();
    let sbar = ric.trace_with(conn.inverse()).coeff(0).clone();
    let gamma = m.tangential().coeff(0);
    let b = boundary_curvature(gamma)?;

    let mut short = 0.0_f64;
    let mut corrected = 0.0_f64;
    let mut gap = 0.0_f64;
    let coef_short = sbar.sub(&b.scalar3.scale(1.5)).scale(1.0 / 6.0);
    let coef_corrected = sbar.sub(&b.scalar3.scale(3.0)).scale(1.0 / 6.0);
    for i in 0..3 {
        for j in i..3 {
            let lhs = ric.get(i + 1, j + 1).coeff(0);
            let base = b.ricci3.get(i, j).scale(2.0);
            let g = gamma.get(i, j);
            let p = lhs.sub(&base).sub(&coef_short.mul(g));
            let c = lhs.sub(&base).sub(&coef_corrected.mul(g));
            short = short.max(p.sup_norm());
            corrected = corrected.max(c.sup_norm());
            gap = gap.max(b.scalar3.mul(g).scale(0.25).sup_norm());
        }
    }
    let mixed = (1..4)
        .map(|i| ric.get(0, i).coeff(0).sup_norm())
        .fold(0.0, f64::max);
    Ok(BoundaryIdentityReport {
        tangential_short: short,
        tangential_corrected: corrected,
        predicted_short_gap: gap,
        mixed,
    })
}
