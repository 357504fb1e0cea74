//! Levi-Civita connection and curvature of a series-valued metric.
//!
//! Conventions, used everywhere in the crate:
//!
//! * `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z`, so in coordinates
//!   `R^a_{bcd} = ∂_cΓ^a_{db} − ∂_dΓ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}`
//!   with `R(∂_c,∂_d)∂_b = R^a_{bcd}∂_a`.
//! * `R_{abcd} = g_{ae}R^e_{bcd}`; a space of constant curvature `κ` has
//!   `R_{abcd} = κ(g_{ac}g_{bd} − g_{ad}g_{bc})`.
//! * `Ric_{bd} = R^a_{bad}`, `s = g^{bd}Ric_{bd}`.
//! * Sectional curvature `K(∂_c,∂_d) = R_{cdcd}/(g_{cc}g_{dd} − g_{cd}²)`.

use rayon::prelude::*;

use crate::error::Result;
use crate::field::GridSpec;
use crate::series::Series;
use crate::symform::{sym_index, sym_len};

use super::tensor::{inverse_metric, Chart, SymTensor};

/// Christoffel symbols of the second kind, `Γ^a_{bc}`.
#[derive(Debug, Clone)]
pub struct Connection {
    chart: Chart,
    metric: SymTensor,
    inverse: SymTensor,
    gamma: Vec<Vec<Series>>,
}

impl Connection {
    pub fn new(chart: Chart, metric: &SymTensor) -> Result<Self> {
        let dim = chart.dim();
        assert_eq!(metric.dim(), dim, "metric dimension does not match chart");
        let inverse = inverse_metric(metric)?;
        let grid = metric.grid();

        // dg[e][s] = ∂_e g_s
        let dg: Vec<Vec<Series>> = (0..dim)
            .map(|e| {
                metric
                    .components()
                    .par_iter()
                    .map(|c| chart.partial(c, e))
                    .collect()
            })
            .collect();
        let order = dg
            .iter()
            .flat_map(|row| row.iter().map(|s| s.order()))
            .min()
            .unwrap();

        // Γ_{d,bc} = ½(∂_b g_{dc} + ∂_c g_{db} − ∂_d g_{bc})
        let lowered: Vec<Vec<Series>> = (0..dim)
            .map(|d| {
                (0..sym_len(dim))
                    .map(|s| {
                        let (b, c) = crate::symform::sym_pair(s, dim);
                        let mut acc = Series::zeros(grid, order);
                        acc.axpy(0.5, &dg[b][sym_index(d, c, dim)]);
                        acc.axpy(0.5, &dg[c][sym_index(d, b, dim)]);
                        acc.axpy(-0.5, &dg[d][s]);
                        acc
                    })
                    .collect()
            })
            .collect();

        let gamma = (0..dim)
            .map(|a| {
                (0..sym_len(dim))
                    .into_par_iter()
                    .map(|s| {
                        let mut acc = Series::zeros(grid, order);
                        for (d, low) in lowered.iter().enumerate() {
                            acc.add_product(inverse.get(a, d), &low[s]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            chart,
            metric: metric.clone(),
            inverse,
            gamma,
        })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn metric(&self) -> &SymTensor {
        &self.metric
    }

    pub fn inverse(&self) -> &SymTensor {
        &self.inverse
    }

    pub fn grid(&self) -> GridSpec {
        self.metric.grid()
    }

    /// `Γ^a_{bc}`.
    pub fn gamma(&self, a: usize, b: usize, c: usize) -> &Series {
        &self.gamma[a][sym_index(b, c, self.dim())]
    }

    /// Order of the Christoffel series.
    pub fn order(&self) -> usize {
        self.gamma[0][0].order()
    }

    /// Ricci tensor straight from the Christoffel symbols,
    /// `Ric_{bd} = ∂_aΓ^a_{bd} − ∂_d C_b + C_eΓ^e_{bd} − Γ^a_{de}Γ^e_{ab}`
    /// with `C_b = Γ^a_{ab}`.
    pub fn ricci(&self) -> SymTensor {
        let dim = self.dim();
        let grid = self.grid();
        let order = self.order();
        let contracted: Vec<Series> = (0..dim)
            .map(|b| {
                let mut acc = Series::zeros(grid, order);
                for a in 0..dim {
                    acc.axpy(1.0, self.gamma(a, a, b));
                }
                acc
            })
            .collect();
        let comps = (0..sym_len(dim))
            .into_par_iter()
            .map(|s| {
                let (b, d) = crate::symform::sym_pair(s, dim);
                let mut acc = Series::zeros(grid, order);
                for a in 0..dim {
                    acc.axpy(1.0, &self.chart.partial(self.gamma(a, b, d), a));
                }
                acc.axpy(-1.0, &self.chart.partial(&contracted[b], d));
                for e in 0..dim {
                    acc.add_product(&contracted[e], self.gamma(e, b, d));
                    for a in 0..dim {
                        acc.add_scaled_product(-1.0, self.gamma(a, d, e), self.gamma(e, a, b));
                    }
                }
                acc
            })
            .collect();
        SymTensor::from_components(dim, comps)
    }

    /// `R^a_{bcd}` for `c < d`, indexed `[a][b][pair(c,d)]`.
    fn riemann_up(&self) -> Vec<Vec<Vec<Series>>> {
        let dim = self.dim();
        let grid = self.grid();
        let order = self.order();
        let pairs = antisym_pairs(dim);
        (0..dim)
            .map(|a| {
                (0..dim)
                    .map(|b| {
                        pairs
                            .par_iter()
                            .map(|&(c, d)| {
                                let mut acc = Series::zeros(grid, order);
                                acc.axpy(1.0, &self.chart.partial(self.gamma(a, d, b), c));
                                acc.axpy(-1.0, &self.chart.partial(self.gamma(a, c, b), d));
                                for e in 0..dim {
                                    acc.add_product(self.gamma(a, c, e), self.gamma(e, d, b));
                                    acc.add_scaled_product(
                                        -1.0,
                                        self.gamma(a, d, e),
                                        self.gamma(e, c, b),
                                    );
                                }
                                acc
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Ordered pairs `(c, d)` with `c < d`.
pub fn antisym_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for c in 0..dim {
        for d in (c + 1)..dim {
            v.push((c, d));
        }
    }
    v
}

fn pair_slot(c: usize, d: usize, dim: usize) -> (usize, f64) {
    let (lo, hi, sign) = if c < d { (c, d, 1.0) } else { (d, c, -1.0) };
    let slot = antisym_pairs(dim)
        .iter()
        .position(|&p| p == (lo, hi))
        .unwrap();
    (slot, sign)
}

/// A 4-index tensor with the antisymmetry of its last pair built in.
#[derive(Debug, Clone)]
pub struct FourTensor {
    dim: usize,
    comps: Vec<Vec<Vec<Series>>>,
}

impl FourTensor {
    /// Component `T_{abcd}`; `None` when `c == d`.
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> Option<(f64, &Series)> {
        if c == d {
            return None;
        }
        let (slot, sign) = pair_slot(c, d, self.dim);
        Some((sign, &self.comps[a][b][slot]))
    }

    /// Owned `T_{abcd}` (zero series when `c == d`).
    pub fn value(&self, a: usize, b: usize, c: usize, d: usize) -> Series {
        match self.get(a, b, c, d) {
            Some((s, v)) if s > 0.0 => v.clone(),
            Some((s, v)) => v.scale(s),
            None => self.comps[0][0][0].zeros_like(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.comps[0][0][0].order()
    }

    /// Largest per-order sup norm over all stored components.
    pub fn order_norms(&self) -> Vec<f64> {
        let order = self.order();
        (0..=order)
            .map(|k| {
                self.comps
                    .iter()
                    .flatten()
                    .flatten()
                    .map(|s| s.coeff(k).sup_norm())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Algebraic consistency of a computed curvature, as largest sup norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryDefects {
    /// `R_{abcd} + R_{bacd}`
    pub first_pair: f64,
    /// `R_{abcd} − R_{cdab}`
    pub pair_exchange: f64,
    /// `R_{abcd} + R_{acdb} + R_{adbc}`
    pub first_bianchi: f64,
    /// Ricci from the Christoffel formula minus the Riemann contraction.
    pub ricci_contraction: f64,
    /// Largest trace `g^{ac}W_{abcd}`.
    pub weyl_trace: f64,
}

/// Riemann, Ricci, scalar and Weyl curvature of a series metric.
#[derive(Debug, Clone)]
pub struct Curvature4 {
    connection: Connection,
    riemann: FourTensor,
    ricci: SymTensor,
    scalar: Series,
    weyl: FourTensor,
}

impl Curvature4 {
    pub fn new(chart: Chart, metric: &SymTensor) -> Result<Self> {
        let connection = Connection::new(chart, metric)?;
        Ok(Self::from_connection(connection))
    }

    pub fn from_connection(connection: Connection) -> Self {
        let dim = connection.dim();
        let grid = connection.grid();
        let up = connection.riemann_up();
        let order = up[0][0][0].order();
        let g = connection.metric();
        let npairs = antisym_pairs(dim).len();
        let lowered: Vec<Vec<Vec<Series>>> = (0..dim)
            .map(|f| {
                (0..dim)
                    .map(|b| {
                        (0..npairs)
                            .map(|p| {
                                let mut acc = Series::zeros(grid, order);
                                for (a, row) in up.iter().enumerate() {
                                    acc.add_product(g.get(f, a), &row[b][p]);
                                }
                                acc
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let riemann = FourTensor {
            dim,
            comps: lowered,
        };
        let ricci = connection.ricci();
        let scalar = ricci.trace_with(connection.inverse());
        let weyl = weyl_tensor(&riemann, &ricci, &scalar, g);
        Self {
            connection,
            riemann,
            ricci,
            scalar,
            weyl,
        }
    }

    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    pub fn riemann(&self) -> &FourTensor {
        &self.riemann
    }

    pub fn ricci(&self) -> &SymTensor {
        &self.ricci
    }

    pub fn scalar(&self) -> &Series {
        &self.scalar
    }

    pub fn weyl(&self) -> &FourTensor {
        &self.weyl
    }

    /// Sectional curvature of the coordinate plane `(∂_c, ∂_d)` in the
    /// order-`k` coefficient (for a metric expanded about an interior point,
    /// `k = 0` is the value there).
    pub fn sectional(&self, c: usize, d: usize) -> crate::field::ScalarField {
        let g = self.connection.metric();
        let (sign, r) = self.riemann.get(c, d, c, d).expect("distinct axes");
        let num = r.coeff(0).scale(sign);
        let gcc = g.get(c, c).coeff(0);
        let gdd = g.get(d, d).coeff(0);
        let gcd = g.get(c, d).coeff(0);
        let den = gcc.mul(gdd).sub(&gcd.mul(gcd));
        crate::field::ScalarField::from_values(
            num.grid(),
            num.values()
                .iter()
                .zip(den.values())
                .map(|(n, d)| n / d)
                .collect(),
        )
        .expect("grid size")
    }

    pub fn symmetry_defects(&self) -> SymmetryDefects {
        let dim = self.connection.dim();
        let r = &self.riemann;
        let mut first_pair = 0.0_f64;
        let mut pair_exchange = 0.0_f64;
        let mut first_bianchi = 0.0_f64;
        for a in 0..dim {
            for b in 0..dim {
                for (c, d) in antisym_pairs(dim) {
                    let abcd = r.value(a, b, c, d);
                    first_pair = first_pair.max(abcd.add_trunc(&r.value(b, a, c, d)).sup_norm());
                    pair_exchange =
                        pair_exchange.max(abcd.sub_trunc(&r.value(c, d, a, b)).sup_norm());
                    let cyc = abcd
                        .add_trunc(&r.value(a, c, d, b))
                        .add_trunc(&r.value(a, d, b, c));
                    first_bianchi = first_bianchi.max(cyc.sup_norm());
                }
            }
        }
        let ginv = self.connection.inverse();
        let mut ricci_contraction = 0.0_f64;
        let mut weyl_trace = 0.0_f64;
        for b in 0..dim {
            for d in b..dim {
                let mut ric = Series::zeros(self.connection.grid(), r.order());
                let mut wtr = ric.clone();
                for a in 0..dim {
                    for c in 0..dim {
                        if let Some((s, v)) = r.get(a, b, c, d) {
                            ric.add_scaled_product(s, ginv.get(a, c), v);
                        }
                        if let Some((s, v)) = self.weyl.get(a, b, c, d) {
                            wtr.add_scaled_product(s, ginv.get(a, c), v);
                        }
                    }
                }
                ricci_contraction =
                    ricci_contraction.max(ric.sub_trunc(self.ricci.get(b, d)).sup_norm());
                weyl_trace = weyl_trace.max(wtr.sup_norm());
            }
        }
        SymmetryDefects {
            first_pair,
            pair_exchange,
            first_bianchi,
            ricci_contraction,
            weyl_trace,
        }
    }
}

/// `W = R − (P_{ac}g_{bd} + P_{bd}g_{ac} − P_{ad}g_{bc} − P_{bc}g_{ad})` with
/// the Schouten tensor `P = (Ric − s/(2(n−1)) g)/(n−2)`.
fn weyl_tensor(riemann: &FourTensor, ricci: &SymTensor, scalar: &Series, g: &SymTensor) -> FourTensor {
    let dim = riemann.dim();
    let n = dim as f64;
    let order = riemann.order();
    let schouten = ricci
        .sub(&g.mul_series(scalar).scale(1.0 / (2.0 * (n - 1.0))))
        .scale(1.0 / (n - 2.0))
        .truncate(order);
    let pairs = antisym_pairs(dim);
    let comps = (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| {
                    pairs
                        .iter()
                        .map(|&(c, d)| {
                            let mut w = riemann.value(a, b, c, d);
                            w.add_scaled_product(-1.0, schouten.get(a, c), g.get(b, d));
                            w.add_scaled_product(-1.0, schouten.get(b, d), g.get(a, c));
                            w.add_scaled_product(1.0, schouten.get(a, d), g.get(b, c));
                            w.add_scaled_product(1.0, schouten.get(b, c), g.get(a, d));
                            w
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    FourTensor { dim, comps }
}
