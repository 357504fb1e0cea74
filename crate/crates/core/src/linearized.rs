//! Linearized Einstein operator about an Einstein 4-metric, its gauged
//! form, and decay diagnostics for differences of expansions.
//!
//! Backgrounds are physical metrics written as series in `τ = t − t₀` about
//! an interior slice, so every operator is a plain regular-series
//! computation. With `F(g) = 2(Ric_g + 3εg)`:
//!
//! ```text
//! dF(k) = D*Dk − 2R̊(k) − 2δ*β(k) + (Ric∘k + k∘Ric + 6εk)
//! ```
//!
//! and the bracket vanishes on an Einstein background, leaving `L_E`.

use serde::Serialize;

use crate::error::{FgError, Result};
use crate::fg::FGExpansion;
use crate::geometry::operators::{
    bianchi_op, curvature_action, rough_laplacian, scalar_laplacian, sym_gradient, trace,
};
use crate::geometry::{physical_metric_about, Chart, Curvature4, SymTensor};
use crate::series::Series;

/// Physical background metric about an interior slice, with its curvature.
#[derive(Debug, Clone)]
pub struct Background {
    curvature: Curvature4,
    eps: f64,
}

impl Background {
    pub fn new(metric: &SymTensor, eps: f64) -> Result<Self> {
        if metric.dim() != 4 {
            return Err(FgError::InvalidParameter(format!(
                "background must be a 4-metric, got dimension {}",
                metric.dim()
            )));
        }
        Ok(Self {
            curvature: Curvature4::new(Chart::Bulk, metric)?,
            eps,
        })
    }

    /// `t⁻²ḡ` for an expansion, re-expanded about `t = t0` to `order`.
    pub fn about(e: &FGExpansion, t0: f64, order: usize) -> Result<Self> {
        let physical = physical_metric_about(&e.to_bulk().to_tensor(), t0, order)?;
        Self::new(&physical, e.signature())
    }

    pub fn metric(&self) -> &SymTensor {
        self.curvature.connection().metric()
    }

    pub fn curvature(&self) -> &Curvature4 {
        &self.curvature
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Sup norm of `Ric + 3εg` over all valid orders.
    pub fn einstein_defect(&self) -> f64 {
        einstein_operator(self.curvature.ricci(), self.metric(), self.eps)
            .scale(0.5)
            .sup_norm()
    }
}

fn einstein_operator(ric: &SymTensor, g: &SymTensor, eps: f64) -> SymTensor {
    let order = ric.order();
    ric.zip(&g.truncate(order), |r, m| {
        let mut s = r.clone();
        s.axpy(3.0 * eps, m);
        s
    })
    .scale(2.0)
}

/// `F(g) = 2(Ric_g + 3εg)` of a 4-metric series.
pub fn nonlinear_residual(metric: &SymTensor, eps: f64) -> Result<SymTensor> {
    let curv = Curvature4::new(Chart::Bulk, metric)?;
    Ok(einstein_operator(curv.ricci(), metric, eps))
}

/// Gauged operator `L(κ) = D*Dκ − 2R̊(κ)`. The other common normalization
/// `½D*D − R̊` is half of this.
pub fn gauged_operator(bg: &Background, kappa: &SymTensor) -> SymTensor {
    let conn = bg.curvature.connection();
    let lap = rough_laplacian(conn, kappa);
    let order = lap.order();
    lap.sub(&curvature_action(&bg.curvature, kappa).truncate(order).scale(2.0))
}

/// `−2δ*β(κ)`.
pub fn gauge_term(bg: &Background, kappa: &SymTensor) -> SymTensor {
    let conn = bg.curvature.connection();
    sym_gradient(conn, &bianchi_op(conn, kappa)).scale(-2.0)
}

/// `L_E(k) = D*Dk − 2R̊(k) − 2δ*β(k)`.
pub fn linearized_einstein(bg: &Background, k: &SymTensor) -> SymTensor {
    let l = gauged_operator(bg, k);
    let order = l.order();
    l.add(&gauge_term(bg, k).truncate(order))
}

/// `Ric∘k + k∘Ric + 6εk`, the part of `dF(k)` that vanishes on Einstein
/// backgrounds.
pub fn ricci_correction(bg: &Background, k: &SymTensor) -> SymTensor {
    let ric = bg.curvature.ricci();
    let ginv = bg.curvature.connection().inverse();
    let order = ric.order().min(k.order());
    let grid = k.grid();
    SymTensor::from_fn(4, |a, b| {
        let mut acc = k.get(a, b).truncate(order).scale(6.0 * bg.eps);
        for c in 0..4 {
            for d in 0..4 {
                let g = ginv.get(c, d);
                let mut t = Series::zeros(grid, order);
                t.add_product(ric.get(a, c), k.get(d, b));
                t.add_product(k.get(a, c), ric.get(d, b));
                acc.add_product(g, &t);
            }
        }
        acc
    })
}

/// Full derivative `dF(k)` on an arbitrary background.
pub fn linearized_residual(bg: &Background, k: &SymTensor) -> SymTensor {
    let l = linearized_einstein(bg, k);
    let order = l.order();
    l.add(&ricci_correction(bg, k).truncate(order))
}

/// Both sides of the trace identity `tr L(κ) = −Δ tr κ + 6 tr κ`, the second
/// computed from the scalar Laplacian only.
pub fn trace_identity_sides(bg: &Background, kappa: &SymTensor) -> (Series, Series) {
    let conn = bg.curvature.connection();
    let lhs = trace(conn, &gauged_operator(bg, kappa));
    let tr = trace(conn, kappa);
    let lap = scalar_laplacian(conn, &tr);
    let order = lhs.order().min(lap.order());
    let mut rhs = lap.truncate(order).scale(-1.0);
    rhs.axpy(6.0, &tr.truncate(order));
    (lhs.truncate(order), rhs)
}

/// Central difference `(F(g + sk) − F(g − sk)) / 2s`.
pub fn finite_difference(bg: &Background, k: &SymTensor, s: f64) -> Result<SymTensor> {
    let g = bg.metric();
    let plus = nonlinear_residual(&g.add(&k.scale(s)), bg.eps)?;
    let minus = nonlinear_residual(&g.sub(&k.scale(s)), bg.eps)?;
    Ok(plus.sub(&minus).scale(0.5 / s))
}

/// Observed convergence order of the finite difference towards `dF(k)` when
/// the step is halved from `s` to `s/2`, plus both errors.
pub fn fd_convergence(bg: &Background, k: &SymTensor, s: f64) -> Result<(f64, f64, f64)> {
    let exact = linearized_residual(bg, k);
    let err = |step: f64| -> Result<f64> {
        let fd = finite_difference(bg, k, step)?;
        let order = fd.order().min(exact.order());
        Ok(fd.truncate(order).sub(&exact.truncate(order)).sup_norm())
    };
    let e1 = err(s)?;
    let e2 = err(s / 2.0)?;
    Ok(((e1 / e2).log2(), e1, e2))
}

/// Lowest order whose coefficient exceeds `1e-12`, if any.
pub fn leading_order(s: &Series) -> Option<usize> {
    s.order_norms().iter().position(|n| *n > LEADING_ORDER_TOL)
}

const LEADING_ORDER_TOL: f64 = 1e-12;

/// A symmetric 4-tensor series with a declared leading order.
#[derive(Debug, Clone)]
pub struct Perturbation {
    k: SymTensor,
    weight: usize,
}

impl Perturbation {
    pub fn new(k: SymTensor, weight: usize) -> Result<Self> {
        let actual = k.components().iter().filter_map(leading_order).min();
        if let Some(actual) = actual {
            if actual != weight {
                return Err(FgError::InvalidParameter(format!(
                    "declared leading order {weight}, found {actual}"
                )));
            }
        }
        Ok(Self { k, weight })
    }

    /// Difference `ḡ₁ − ḡ₂` of two expansions on the same grid, in `t`.
    pub fn difference(a: &FGExpansion, b: &FGExpansion) -> Result<Self> {
        let order = a.order().min(b.order());
        let k = a.to_bulk().to_tensor().truncate(order).sub(&b.to_bulk().to_tensor().truncate(order));
        let weight = k
            .components()
            .iter()
            .filter_map(leading_order)
            .min()
            .unwrap_or(order + 1);
        Self::new(k, weight)
    }

    pub fn tensor(&self) -> &SymTensor {
        &self.k
    }

    pub fn weight(&self) -> usize {
        self.weight
    }
}

/// Leading orders of the tangential block and of the `κ(N,·) = κ₀ₐ`
/// components; `None` means identically zero through the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecayReport {
    pub tangential_order: Option<usize>,
    pub normal_order: Option<usize>,
}

impl DecayReport {
    /// Tangential order ≥ 3 and normal order ≥ 4.
    pub fn satisfies_fg_decay(&self) -> bool {
        self.tangential_order.is_none_or(|o| o >= 3) && self.normal_order.is_none_or(|o| o >= 4)
    }
}

pub fn decay_diagnostic(kappa: &Perturbation) -> DecayReport {
    let k = kappa.tensor();
    let tangential_order = (1..4)
        .flat_map(|i| (i..4).map(move |j| (i, j)))
        .filter_map(|(i, j)| leading_order(k.get(i, j)))
        .min();
    let normal_order = (0..4).filter_map(|a| leading_order(k.get(0, a))).min();
    DecayReport {
        tangential_order,
        normal_order,
    }
}
