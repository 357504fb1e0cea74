//! Geodesic normalization of a compactification.
//!
//! The input `(g_t, u)` describes the compactification `ĝ = u²(dt² + g_t)` of
//! the AH metric `g = ρ⁻²ĝ` with defining function `ρ = t·u`. We solve the
//! eikonal equation for the geodesic defining function `t̂ = t·v`
//! (`|dt̂|_{t̂²g} = 1`, `v₀ = 1`), flow the boundary along `∇t̂` to get
//! coordinates `(t̂, x̂)`, and pull `t̂²g` back to them.

use crate::error::{FgError, Result};
use crate::field::ScalarField;
use crate::series::{matrix_series_inverse, MatrixSeries, Series, TSeries};
use crate::symform::{sym_index, sym_pair, SymForm};

/// Result of [`geodesic_normalization`].
#[derive(Debug, Clone)]
pub struct GeodesicNormalization {
    /// `v` with `t̂ = t·v`, as a series in the original `t`.
    pub defining: Series,
    /// Tangential part of `t̂²g` in the new coordinates.
    pub tangential: TSeries<SymForm>,
    /// Per-order sup norms of `|dt̂|²_{t̂²g} − 1` (multiplied by `ω²`).
    pub eikonal_norms: Vec<f64>,
    /// Largest coefficient of `Ĝ_{t̂t̂} − 1` and `Ĝ_{t̂i}` after the pullback.
    pub gauge_defect: f64,
}

/// Tangential metric of the geodesic compactification of `u²(dt² + g_t)`.
pub fn geodesic_normalize(g_t: &TSeries<SymForm>, u: &Series) -> Result<TSeries<SymForm>> {
    Ok(geodesic_normalization(g_t, u)?.tangential)
}

/// `∫₀^s f`, raising the order by one.
fn integrate(f: &Series) -> Series {
    let grid = f.grid();
    let mut coeffs = vec![ScalarField::zeros(grid)];
    coeffs.extend(
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c.scale(1.0 / (k + 1) as f64)),
    );
    Series::new(coeffs)
}

/// `f(x̂ + ξ)` as a series in `s`, for `ξ = O(s²)`.
fn shift_field(f: &ScalarField, xi: &[Series; 3], order: usize) -> Series {
    let grid = f.grid();
    let mut out = Series::from_field(f.clone(), order);
    if xi.iter().all(|x| x.is_zero()) || f.is_zero() {
        return out;
    }
    // Taylor terms over non-decreasing index sequences; `weight` is 1/α!.
    fn visit(
        d: &ScalarField,
        prod: &Series,
        start: usize,
        depth: usize,
        weight: f64,
        counts: [usize; 3],
        xi: &[Series; 3],
        out: &mut Series,
    ) {
        if depth > 0 {
            out.axpy(weight, &prod.mul_field(d));
        }
        if 2 * (depth + 1) > prod.order() {
            return;
        }
        for i in start..3 {
            if xi[i].is_zero() {
                continue;
            }
            let mut c = counts;
            c[i] += 1;
            let next = prod.mul_trunc(&xi[i]);
            if next.is_zero() {
                continue;
            }
            visit(
                &d.derivative(i + 1),
                &next,
                i,
                depth + 1,
                weight / c[i] as f64,
                c,
                xi,
                out,
            );
        }
    }
    let one = Series::constant(grid, order, 1.0);
    visit(f, &one, 0, 0, 1.0, [0; 3], xi, &mut out);
    out
}

/// `f(Φ⁰(s), x̂ + ξ(s))` with `Φ⁰ = O(s)`, truncated at `order`.
fn compose(f: &Series, phi0: &Series, xi: &[Series; 3], order: usize) -> Series {
    let grid = f.grid();
    let mut out = Series::zeros(grid, order);
    let mut power = Series::constant(grid, order, 1.0);
    for n in 0..=f.order().min(order) {
        if n > 0 {
            power = power.mul_trunc(&phi0.pad(order));
        }
        let c = f.coeff(n);
        if !c.is_zero() {
            out.add_product(&shift_field(c, xi, order), &power);
        }
    }
    out
}

/// `ĝ^{ab}∂_a(tv)∂_b(tv) − v²u⁻²`, which vanishes iff `|d(tv)|_{t̂²g} = 1`.
fn eikonal(ginv: &MatrixSeries, v: &Series, inv_u2: &Series) -> Series {
    let order = v.order();
    let tv = v.pad(order + 1).shift_up(1);
    let mut grad = vec![tv.dt()];
    grad.extend((0..3).map(|i| tv.dx(i + 1).truncate(order)));
    let mut e = v.mul_trunc(v).mul_trunc(inv_u2).scale(-1.0);
    for a in 0..4 {
        for b in 0..4 {
            if ginv[a][b].is_zero() {
                continue;
            }
            e.add_product(&ginv[a][b], &grad[a].mul_trunc(&grad[b]));
        }
    }
    e
}

/// Solve for the geodesic defining function and pull the metric back.
pub fn geodesic_normalization(g_t: &TSeries<SymForm>, u: &Series) -> Result<GeodesicNormalization> {
    let order = g_t.order();
    let grid = g_t.coeff(0).grid();
    let u = u.pad(order).truncate(order);
    let u0 = u.coeff(0);
    let deviation = u0.sub(&ScalarField::constant(grid, 1.0)).sup_norm();
    if deviation > 1e-14 {
        return Err(FgError::NonUnitConformalFactor(deviation));
    }

    let u2 = u.mul_trunc(&u);
    let tangential: Vec<Series> = (0..6)
        .map(|s| {
            let (i, j) = sym_pair(s, 3);
            Series::new(g_t.coeffs().iter().map(|c| c.get(i, j).clone()).collect())
        })
        .collect();
    let ghat: MatrixSeries = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| match (a, b) {
                    (0, 0) => u2.clone(),
                    (0, _) | (_, 0) => Series::zeros(grid, order),
                    _ => {
                        let (i, j) = (a.min(b) - 1, a.max(b) - 1);
                        u2.mul_trunc(&tangential[sym_index(i, j, 3)])
                    }
                })
                .collect()
        })
        .collect();
    let ginv = matrix_series_inverse(&ghat)?;
    let inv_u2 = u2.reciprocal()?;

    // Eikonal, order by order: the order-n coefficient is affine in v_n with
    // slope 2(n+1)ĝ⁰⁰₀ − 2(u⁻²)₀.
    let mut v = Series::constant(grid, order, 1.0);
    let e0 = eikonal(&ginv, &v.truncate(0), &inv_u2.truncate(0));
    if e0.coeff(0).sup_norm() > 1e-12 {
        return Err(FgError::InvalidParameter(
            "compactification is not asymptotically hyperbolic: |dρ| ≠ 1 at the boundary".into(),
        ));
    }
    for n in 1..=order {
        let partial = v.truncate(n);
        let e = eikonal(&ginv, &partial, &inv_u2.truncate(n));
        let slope = ginv[0][0]
            .coeff(0)
            .scale(2.0 * (n + 1) as f64)
            .sub(&inv_u2.coeff(0).scale(2.0));
        let values: Vec<f64> = e
            .coeff(n)
            .values()
            .iter()
            .zip(slope.values())
            .map(|(c, a)| -c / a)
            .collect();
        *v.coeff_mut(n) = ScalarField::from_values(grid, values)?;
    }
    let eikonal_norms = eikonal(&ginv, &v, &inv_u2).order_norms();

    // Gradient field of t̂ for the metric t̂²g = ω²ĝ, ω = v/u.
    let omega2 = v.mul_trunc(&v).mul_trunc(&inv_u2);
    let inv_omega2 = omega2.reciprocal()?;
    let tv = v.pad(order + 1).shift_up(1);
    let mut grad = vec![tv.dt()];
    grad.extend((0..3).map(|i| tv.dx(i + 1).truncate(order)));
    let field: Vec<Series> = (0..4)
        .map(|a| {
            let mut acc = Series::zeros(grid, order);
            for (b, gb) in grad.iter().enumerate() {
                if !ginv[a][b].is_zero() {
                    acc.add_product(&ginv[a][b], gb);
                }
            }
            acc.mul_trunc(&inv_omega2)
        })
        .collect();

    // Picard iteration for the flow from (0, x̂); each pass fixes one order.
    let mut phi0 = Series::t_power(grid, order + 1, 1);
    let mut xi: [Series; 3] = std::array::from_fn(|_| Series::zeros(grid, order + 1));
    for _ in 0..=order {
        let w: Vec<Series> = field.iter().map(|f| compose(f, &phi0, &xi, order)).collect();
        phi0 = integrate(&w[0]);
        xi = std::array::from_fn(|i| integrate(&w[i + 1]));
    }

    // Pull back Ĝ = ω²ĝ.
    let composed: Vec<Vec<Series>> = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| {
                    if ghat[a][b].is_zero() {
                        Series::zeros(grid, order)
                    } else {
                        compose(&omega2.mul_trunc(&ghat[a][b]), &phi0, &xi, order)
                    }
                })
                .collect()
        })
        .collect();
    let coords: Vec<&Series> = std::iter::once(&phi0).chain(xi.iter()).collect();
    let jac: Vec<Vec<Series>> = (0..4)
        .map(|a| {
            let mut row = vec![coords[a].dt()];
            for i in 0..3 {
                let mut d = coords[a].dx(i + 1).truncate(order);
                if a == i + 1 {
                    *d.coeff_mut(0) = d.coeff(0).add(&ScalarField::constant(grid, 1.0));
                }
                row.push(d);
            }
            row
        })
        .collect();
    let pulled = |c: usize, d: usize| -> Series {
        let mut acc = Series::zeros(grid, order);
        for a in 0..4 {
            for b in 0..4 {
                if composed[a][b].is_zero() || jac[a][c].is_zero() || jac[b][d].is_zero() {
                    continue;
                }
                acc.add_product(&composed[a][b], &jac[a][c].mul_trunc(&jac[b][d]));
            }
        }
        acc
    };

    let mut gauge_defect = pulled(0, 0)
        .sub_trunc(&Series::constant(grid, order, 1.0))
        .sup_norm();
    for i in 1..4 {
        gauge_defect = gauge_defect.max(pulled(0, i).sup_norm());
    }
    let comps: Vec<Series> = (0..6)
        .map(|s| {
            let (i, j) = sym_pair(s, 3);
            pulled(i + 1, j + 1)
        })
        .collect();
    let tangential = TSeries::new(
        (0..=order)
            .map(|k| {
                SymForm::from_components(comps.iter().map(|c| c.coeff(k).clone()).collect())
            })
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(GeodesicNormalization {
        defining: v,
        tangential,
        eikonal_norms,
        gauge_defect,
    })
}
