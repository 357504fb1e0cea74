//! Differential operators on symmetric 2-tensors and 1-forms.
//!
//! Sign conventions: `(δh)_b = −∇^a h_{ab}`, `β(h) = δh + ½ d(tr h)`,
//! `δ*ω = sym ∇ω`, `D*D = −g^{ab}∇_a∇_b`, `Δf = g^{ab}∇_a∇_b f` (so
//! `Δ = −∇*∇`), and `R̊(h)_{ab} = R_{acbd}h^{cd}`, which gives `R̊(g) = Ric`.

use rayon::prelude::*;

use crate::series::Series;
use crate::symform::{sym_len, sym_pair};

use super::curvature::{Connection, Curvature4};
use super::tensor::{Covector, SymTensor};

/// `(∇_a h)_{bc}`, indexed `[a]`.
pub fn covariant_derivative(conn: &Connection, h: &SymTensor) -> Vec<SymTensor> {
    let dim = conn.dim();
    let chart = conn.chart();
    (0..dim)
        .into_par_iter()
        .map(|a| {
            SymTensor::from_fn(dim, |b, c| {
                let mut acc = chart.partial(h.get(b, c), a);
                for e in 0..dim {
                    acc.add_scaled_product(-1.0, conn.gamma(e, a, b), h.get(e, c));
                    acc.add_scaled_product(-1.0, conn.gamma(e, a, c), h.get(b, e));
                }
                acc
            })
        })
        .collect()
}

/// `(∇_a∇_b h)_{cd}`, indexed `[a][b]`.
pub fn second_covariant_derivative(conn: &Connection, h: &SymTensor) -> Vec<Vec<SymTensor>> {
    let dim = conn.dim();
    let chart = conn.chart();
    let dh = covariant_derivative(conn, h);
    (0..dim)
        .map(|a| {
            (0..dim)
                .into_par_iter()
                .map(|b| {
                    SymTensor::from_fn(dim, |c, d| {
                        let mut acc = chart.partial(dh[b].get(c, d), a);
                        for e in 0..dim {
                            acc.add_scaled_product(-1.0, conn.gamma(e, a, b), dh[e].get(c, d));
                            acc.add_scaled_product(-1.0, conn.gamma(e, a, c), dh[b].get(e, d));
                            acc.add_scaled_product(-1.0, conn.gamma(e, a, d), dh[b].get(c, e));
                        }
                        acc
                    })
                })
                .collect()
        })
        .collect()
}

/// `g^{ab} h_{ab}`.
pub fn trace(conn: &Connection, h: &SymTensor) -> Series {
    h.trace_with(conn.inverse())
}

/// `(δh)_b = −g^{ac}(∇_a h)_{cb}`.
pub fn divergence(conn: &Connection, h: &SymTensor) -> Covector {
    let dim = conn.dim();
    let ginv = conn.inverse();
    let dh = covariant_derivative(conn, h);
    let order = dh[0].order().min(ginv.order());
    (0..dim)
        .map(|b| {
            let mut acc = Series::zeros(h.grid(), order);
            for a in 0..dim {
                for c in 0..dim {
                    acc.add_scaled_product(-1.0, ginv.get(a, c), dh[a].get(c, b));
                }
            }
            acc
        })
        .collect()
}

/// `df`.
pub fn differential(conn: &Connection, f: &Series) -> Covector {
    (0..conn.dim()).map(|a| conn.chart().partial(f, a)).collect()
}

/// `β(h) = δh + ½ d(tr h)`.
pub fn bianchi_op(conn: &Connection, h: &SymTensor) -> Covector {
    let div = divergence(conn, h);
    let dtr = differential(conn, &trace(conn, h));
    div.iter()
        .zip(&dtr)
        .map(|(a, b)| {
            let mut s = a.clone();
            s.axpy(0.5, b);
            s
        })
        .collect()
}

/// `(δ*ω)_{ab} = ½(∇_aω_b + ∇_bω_a)`.
pub fn sym_gradient(conn: &Connection, w: &[Series]) -> SymTensor {
    let dim = conn.dim();
    let chart = conn.chart();
    SymTensor::from_fn(dim, |a, b| {
        let mut acc = chart.partial(&w[b], a);
        acc.axpy(1.0, &chart.partial(&w[a], b));
        let mut acc = acc.scale(0.5);
        for e in 0..dim {
            acc.add_scaled_product(-1.0, conn.gamma(e, a, b), &w[e]);
        }
        acc
    })
}

/// Rough Laplacian `D*D h = −g^{ab}∇_a∇_b h`.
pub fn rough_laplacian(conn: &Connection, h: &SymTensor) -> SymTensor {
    let dim = conn.dim();
    let ginv = conn.inverse();
    let ddh = second_covariant_derivative(conn, h);
    let order = ddh[0][0].order().min(ginv.order());
    let comps = (0..sym_len(dim))
        .into_par_iter()
        .map(|s| {
            let (c, d) = sym_pair(s, dim);
            let mut acc = Series::zeros(h.grid(), order);
            for a in 0..dim {
                for b in 0..dim {
                    acc.add_scaled_product(-1.0, ginv.get(a, b), ddh[a][b].get(c, d));
                }
            }
            acc
        })
        .collect();
    SymTensor::from_components(dim, comps)
}

/// Scalar Laplacian `Δf = g^{ab}(∂_a∂_b f − Γ^e_{ab}∂_e f)`.
pub fn scalar_laplacian(conn: &Connection, f: &Series) -> Series {
    let dim = conn.dim();
    let chart = conn.chart();
    let ginv = conn.inverse();
    let df: Vec<Series> = (0..dim).map(|a| chart.partial(f, a)).collect();
    let hess = SymTensor::from_fn(dim, |a, b| {
        let mut acc = chart.partial(&df[b], a);
        for (e, dfe) in df.iter().enumerate() {
            acc.add_scaled_product(-1.0, conn.gamma(e, a, b), dfe);
        }
        acc
    });
    hess.trace_with(ginv)
}

/// Curvature action `R̊(h)_{ab} = R_{acbd} h^{cd}`.
pub fn curvature_action(curv: &Curvature4, h: &SymTensor) -> SymTensor {
    let conn = curv.connection();
    let dim = conn.dim();
    let hup = h.raise_both(conn.inverse());
    let riem = curv.riemann();
    let order = riem.order().min(hup.order());
    SymTensor::from_fn(dim, |a, b| {
        let mut acc = Series::zeros(h.grid(), order);
        for c in 0..dim {
            for d in 0..dim {
                if let Some((sign, r)) = riem.get(a, c, b, d) {
                    acc.add_scaled_product(sign, r, hup.get(c, d));
                }
            }
        }
        acc
    })
}

/// Sign of the Weyl term in [`bach`]. With the curvature conventions of this
/// crate, `−1` is the value for which the compactified AdS–Schwarzschild
/// metric (non-zero Weyl tensor) is Bach-flat.
pub const BACH_WEYL_SIGN: f64 = -1.0;

/// Bach tensor `δ^∇d^∇P + W(Ric)` with `P = Ric − (s/6)g`:
///
/// ```text
/// B_{ab} = −g^{cd}(∇_d∇_c P_{ab} − ∇_d∇_a P_{cb}) + σ W_{acbd} Ric^{cd}
/// ```
///
/// with `σ = BACH_WEYL_SIGN`. A metric of order `K` gives `B` of order `K − 4`.
pub fn bach(curv: &Curvature4) -> SymTensor {
    bach_with_sign(curv, BACH_WEYL_SIGN)
}

/// [`bach`] with an explicit sign for the Weyl term.
pub fn bach_with_sign(curv: &Curvature4, weyl_sign: f64) -> SymTensor {
    let conn = curv.connection();
    let dim = conn.dim();
    let g = conn.metric();
    let ginv = conn.inverse();
    let ric = curv.ricci();
    let p = ric.sub(&g.mul_series(curv.scalar()).scale(1.0 / 6.0));
    let ddp = second_covariant_derivative(conn, &p);
    let ric_up = ric.raise_both(ginv);
    let weyl = curv.weyl();
    let order = ddp[0][0].order();
    let comps = (0..sym_len(dim))
        .into_par_iter()
        .map(|s| {
            let (a, b) = sym_pair(s, dim);
            let mut acc = Series::zeros(g.grid(), order);
            for c in 0..dim {
                for d in 0..dim {
                    let gcd = ginv.get(c, d);
                    acc.add_scaled_product(-1.0, gcd, ddp[d][c].get(a, b));
                    acc.add_scaled_product(1.0, gcd, ddp[d][a].get(c, b));
                    if let Some((sign, w)) = weyl.get(a, c, b, d) {
                        let mut wr = w.mul_trunc(ric_up.get(c, d));
                        wr = wr.scale(sign * weyl_sign);
                        acc.axpy(1.0, &wr);
                    }
                }
            }
            acc
        })
        .collect();
    SymTensor::from_components(dim, comps)
}
