//! Einstein residual of `g = t⁻²ḡ` computed from the regular metric `ḡ`.
//!
//! With `φ = −log t` the conformal-change formula in dimension four reads
//!
//! ```text
//! Ric_g + 3ε g = Ric_ḡ + t⁻¹(2 Hess t + (Δt) ḡ) + t⁻² · 3(ε − |dt|²) ḡ
//! ```
//!
//! where `Hess t = −Γ^0` (the coordinate `t` has no second partials),
//! `Δt = ḡ^{ab}(Hess t)_{ab}` and `|dt|² = ḡ^{00}`. Each term is regular, so
//! the sum is a Laurent series with a pole of order at most two. The pole
//! must cancel; what remains is the returned residual. If `ḡ` is truncated
//! at order `K` the residual is exact through order `K − 2`, and the
//! coefficient `g₍ₖ₎` first enters at order `k − 2`.
//!
//! `ε = +1` targets `Ric = −3g`, `ε = −1` targets `Ric = +3g`.

use crate::error::Result;
use crate::field::ScalarField;
use crate::series::{LaurentSeries, Series};
use crate::symform::sym_pair;

use super::bulk::BulkMetric;
use super::curvature::Connection;
use super::tensor::{Chart, SymTensor};

/// Default gate for the cancelled negative orders.
pub const CANCELLATION_TOL: f64 = 1e-10;

/// The ten components of `Ric_g + 3εg` as Laurent series.
pub fn einstein_laurent(gbar: &SymTensor, eps: f64) -> Result<Vec<LaurentSeries<ScalarField>>> {
    let conn = Connection::new(Chart::Bulk, gbar)?;
    let ric = conn.ricci();
    Ok(laurent_from_parts(&conn, &ric, eps))
}

fn laurent_from_parts(conn: &Connection, ric: &SymTensor, eps: f64) -> Vec<LaurentSeries<ScalarField>> {
    let g = conn.metric();
    let ginv = conn.inverse();
    let grid = g.grid();
    let order_g = g.order();
    let order_gamma = conn.order();

    let hess = SymTensor::from_fn(4, |a, b| conn.gamma(0, a, b).scale(-1.0));
    let lap = hess.trace_with(ginv);
    let mut pole2 = Series::constant(grid, order_g, eps);
    pole2.axpy(-1.0, ginv.get(0, 0));
    let pole2 = pole2.scale(3.0);

    (0..10)
        .map(|s| {
            let (a, b) = sym_pair(s, 4);
            let gab = g.get(a, b);
            let m2 = pole2.mul_trunc(gab);
            let mut m1 = Series::zeros(grid, order_gamma);
            m1.axpy(2.0, hess.get(a, b));
            m1.add_product(&lap, gab);
            let l2 = LaurentSeries::from_series(&m2, -2).expect("floor is -2");
            let l1 = LaurentSeries::from_series(&m1, -1).expect("floor is -1");
            let l0 = LaurentSeries::from_series(ric.get(a, b), 0).expect("floor is 0");
            l2.add(&l1).add(&l0)
        })
        .collect()
}

/// Regular part of `Ric_g + 3εg` for a general regular 4-metric `ḡ`, after
/// asserting that the negative orders cancel to within `tol`.
pub fn einstein_residual_general(gbar: &SymTensor, eps: f64, tol: f64) -> Result<SymTensor> {
    let parts = einstein_laurent(gbar, eps)?;
    let comps = parts
        .iter()
        .map(|l| l.assert_regular(tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymTensor::from_components(4, comps))
}

/// Einstein residual of a geodesic-gauge metric with its own signature.
pub fn einstein_residual(m: &BulkMetric) -> Result<SymTensor> {
    einstein_residual_general(&m.to_tensor(), m.signature(), CANCELLATION_TOL)
}

/// Largest sup norm of the order −2 and −1 coefficients.
pub fn pole_norms(parts: &[LaurentSeries<ScalarField>]) -> [f64; 2] {
    let mut out = [0.0_f64; 2];
    for l in parts {
        for (slot, k) in [(0, -2), (1, -1)] {
            if let Some(c) = l.coeff(k) {
                out[slot] = out[slot].max(c.sup_norm());
            }
        }
    }
    out
}
