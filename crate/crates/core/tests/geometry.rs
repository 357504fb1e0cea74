mod common;

use common::*;
use fgforge::field::FourierMode;
use fgforge::geometry::bulk::physical_metric_about;
use fgforge::geometry::einstein::{einstein_laurent, pole_norms};
use fgforge::geometry::operators::{bach, bach_with_sign, differential, divergence, scalar_laplacian};
use fgforge::geometry::tensor::Chart;
use fgforge::geometry::{
    boundary::boundary_bianchi_defect, boundary_curvature, einstein_residual, BulkMetric,
    Connection, Curvature4, SymTensor,
};
use fgforge::{GridSpec, ScalarField, Series, SymForm, TSeries};
use nalgebra::Matrix4;

fn cusp(g: GridSpec, order: usize) -> BulkMetric {
    BulkMetric::flat(g, order, 1.0)
}

fn cone_tensor(g: GridSpec) -> SymTensor {
    // dt² + (1 − t²/4)² δ = dt² + (1 − t²/2 + t⁴/16) δ
    let poly = Series::new(
        [1.0, 0.0, -0.5, 0.0, 1.0 / 16.0]
            .iter()
            .map(|c| ScalarField::constant(g, *c))
            .collect(),
    );
    SymTensor::from_fn(4, |a, b| match (a, b) {
        (0, 0) => Series::constant(g, 4, 1.0),
        (a, b) if a == b => poly.clone(),
        _ => Series::zeros(g, 4),
    })
}

#[test]
fn flat_metric_has_no_curvature() {
    let g = grid(8);
    let m = cusp(g, 4).to_tensor();
    let c = Curvature4::new(Chart::Bulk, &m).unwrap();
    assert_eq!(c.ricci().sup_norm(), 0.0);
    assert_eq!(c.scalar().sup_norm(), 0.0);
    assert_eq!(bach(&c).sup_norm(), 0.0);
}

#[test]
fn cusp_residual_vanishes_including_poles() {
    let g = grid(8);
    let m = cusp(g, 8);
    let parts = einstein_laurent(&m.to_tensor(), 1.0).unwrap();
    let [p2, p1] = pole_norms(&parts);
    assert!(p2 <= 1e-12 && p1 <= 1e-12);
    let r = einstein_residual(&m).unwrap();
    assert_eq!(r.order(), 6);
    assert!(r.sup_norm() <= 1e-12);
}

#[test]
fn lorentzian_cusp_is_de_sitter() {
    let g = grid(8);
    let m = BulkMetric::flat(g, 6, -1.0);
    assert!(einstein_residual(&m).unwrap().sup_norm() <= 1e-12);
}

#[test]
fn corrupted_second_coefficient_shows_at_order_zero() {
    let g = grid(8);
    let mut coeffs = vec![SymForm::zeros(g); 7];
    coeffs[0] = SymForm::identity(g);
    coeffs[2] = SymForm::scaled_identity(g, 0.1);
    let m = BulkMetric::riemannian(TSeries::new(coeffs)).unwrap();
    let norms = einstein_residual(&m).unwrap().order_norms();
    assert!(norms[0] >= 1e-3, "order-0 residual {}", norms[0]);
}

#[test]
fn cone_sectional_curvatures() {
    let g = grid(8);
    let gbar = cone_tensor(g);
    for t0 in [0.2, 0.4] {
        let phys = physical_metric_about(&gbar, t0, 3).unwrap();
        let c = Curvature4::new(Chart::Bulk, &phys).unwrap();
        let r = (2.0 / t0).ln();
        let coth = 1.0 / r.tanh();
        for i in 1..4 {
            let k = c.sectional(0, i);
            assert!(k.sub(&ScalarField::constant(g, -1.0)).sup_norm() < 1e-9);
        }
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            let k = c.sectional(i, j);
            assert!(
                k.sub(&ScalarField::constant(g, -coth * coth)).sup_norm() < 1e-9,
                "t0 = {t0}: K = {}, expected {}",
                k.values()[0],
                -coth * coth
            );
        }
    }
}

#[test]
fn curvature_symmetries_on_random_metric() {
    let g = grid(32);
    let mut r = rng(11);
    let m = BulkMetric::riemannian(random_tangential(g, &mut r, 4, 0.05)).unwrap();
    let c = Curvature4::new(Chart::Bulk, &m.to_tensor()).unwrap();
    let d = c.symmetry_defects();
    assert!(d.first_pair <= 1e-11, "{d:?}");
    assert!(d.pair_exchange <= 1e-11, "{d:?}");
    assert!(d.first_bianchi <= 1e-11, "{d:?}");
    assert!(d.ricci_contraction <= 1e-11, "{d:?}");
    assert!(d.weyl_trace <= 1e-10, "{d:?}");
}

#[test]
fn contracted_bianchi_and_divergence_of_scaled_metric() {
    let g = grid(32);
    let mut r = rng(12);
    let m = BulkMetric::riemannian(random_tangential(g, &mut r, 5, 0.05)).unwrap();
    let conn = Connection::new(Chart::Bulk, &m.to_tensor()).unwrap();
    let ric = conn.ricci();
    let s = ric.trace_with(conn.inverse());
    let div = divergence(&conn, &ric);
    let ds = differential(&conn, &s);
    for a in 0..4 {
        let mut v = div[a].clone();
        v.axpy(0.5, &ds[a]);
        assert!(v.sup_norm() <= 1e-10, "component {a}: {}", v.sup_norm());
    }

    let f = random_series(g, &mut r, 5, 0.3);
    let fg = conn.metric().mul_series(&f);
    let div = divergence(&conn, &fg);
    let df = differential(&conn, &f);
    for a in 0..4 {
        let v = div[a].add_trunc(&df[a]);
        assert!(v.sup_norm() <= 1e-11);
    }
    let beta = fgforge::geometry::bianchi_op(&conn, conn.metric());
    assert!(beta.iter().all(|b| b.sup_norm() <= 1e-12));
    assert!(boundary_bianchi_defect(&random_form(g, &mut r, 1.0, 0.05)).unwrap() <= 1e-10);
}

#[test]
fn boundary_curvature_of_conformally_flat_metric() {
    let g = grid(32);
    let psi = |x: f64| 0.1 * x.cos();
    let dpsi = |x: f64| -0.1 * x.sin();
    let ddpsi = |x: f64| -0.1 * x.cos();
    let gamma = SymForm::from_fn(g, |i, j| {
        ScalarField::from_fn(g, |x| if i == j { (2.0 * psi(x[0])).exp() } else { 0.0 })
    });
    let b = boundary_curvature(&gamma).unwrap();
    // g = e^{2ψ}δ in dimension 3:
    // Ric = −(Hess ψ − dψ⊗dψ) − (Δψ + |dψ|²)δ, s = e^{−2ψ}(−4Δψ − 2|dψ|²)
    for i in 0..3 {
        for j in i..3 {
            let oracle = ScalarField::from_fn(g, |x| {
                let (p1, p2) = (dpsi(x[0]), ddpsi(x[0]));
                let hess = if i == 0 && j == 0 { p2 - p1 * p1 } else { 0.0 };
                let iso = if i == j { p2 + p1 * p1 } else { 0.0 };
                -hess - iso
            });
            assert!(b.ricci3.get(i, j).sub(&oracle).sup_norm() < 1e-12);
        }
    }
    let s_oracle = ScalarField::from_fn(g, |x| {
        let (p, p1, p2) = (psi(x[0]), dpsi(x[0]), ddpsi(x[0]));
        (-2.0 * p).exp() * (-4.0 * p2 - 2.0 * p1 * p1)
    });
    let err = b.scalar3.sub(&s_oracle).sup_norm();
    assert!(err < 1e-12, "scalar error {err}");

    let flat = boundary_curvature(&SymForm::diag(g, [1.0, 2.0, 0.5])).unwrap();
    assert_eq!(flat.scalar3.sup_norm(), 0.0);
    assert!(boundary_curvature(&SymForm::diag(g, [1.0, -1.0, 1.0])).is_err());
}

#[test]
fn bach_vanishes_on_cusp_and_its_conformal_rescale() {
    let g = grid(8);
    let cusp = cusp(g, 8).to_tensor();
    let c = Curvature4::new(Chart::Bulk, &cusp).unwrap();
    assert!(bach(&c).sup_norm() <= 1e-10);

    // (1 + 0.1t)² (dt² + δ)
    let phi = Series::new(
        [1.0, 0.2, 0.01]
            .iter()
            .map(|v| ScalarField::constant(g, *v))
            .chain(std::iter::repeat_n(ScalarField::zeros(g), 6))
            .collect(),
    );
    let rescaled = cusp.mul_series(&phi);
    let c = Curvature4::new(Chart::Bulk, &rescaled).unwrap();
    let norms = bach_with_sign(&c, 1.0).order_norms();
    assert!(norms.iter().all(|n| *n <= 1e-9), "{norms:?}");
}

#[test]
fn scalar_laplacian_of_flat_metric_is_euclidean() {
    let g = grid(16);
    let conn = Connection::new(Chart::Bulk, &cusp(g, 3).to_tensor()).unwrap();
    let f = Series::from_field(ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin()), 3);
    let lap = scalar_laplacian(&conn, &f);
    let oracle = f.coeff(0).scale(-5.0);
    assert!(lap.coeff(0).sub(&oracle).sup_norm() < 1e-11);
}

/// Component `(constant, modes)` evaluated at an arbitrary point.
#[derive(Clone)]
struct Analytic {
    constant: f64,
    modes: Vec<FourierMode>,
}

impl Analytic {
    fn at(&self, x: [f64; 3]) -> f64 {
        self.constant
            + self
                .modes
                .iter()
                .map(|m| {
                    let ph: f64 = (0..3).map(|a| m.wavevector[a] as f64 * x[a]).sum();
                    m.cos * ph.cos() + m.sin * ph.sin()
                })
                .sum::<f64>()
    }
}

#[test]
fn ricci_matches_finite_differences() {
    let g = grid(32);
    let mut r = rng(99);
    let order = 3;
    // comps[k][slot]
    let comps: Vec<Vec<Analytic>> = (0..=order)
        .map(|k| {
            (0..6)
                .map(|s| {
                    let (i, j) = fgforge::symform::sym_pair(s, 3);
                    Analytic {
                        constant: if k == 0 && i == j { 1.0 } else { 0.0 },
                        modes: random_modes(&mut r, 2, 1, 0.08),
                    }
                })
                .collect()
        })
        .collect();
    let g_t = TSeries::new(
        comps
            .iter()
            .map(|row| {
                SymForm::from_components(
                    row.iter()
                        .map(|a| ScalarField::from_modes(g, a.constant, &a.modes))
                        .collect(),
                )
                .unwrap()
            })
            .collect(),
    );
    let m = BulkMetric::riemannian(g_t).unwrap();
    let ric = Connection::new(Chart::Bulk, &m.to_tensor()).unwrap().ricci();

    let metric = |p: [f64; 4]| -> Matrix4<f64> {
        let mut out = Matrix4::zeros();
        out[(0, 0)] = 1.0;
        for i in 0..3 {
            for j in 0..3 {
                let s = fgforge::symform::sym_index(i, j, 3);
                out[(i + 1, j + 1)] = (0..=order)
                    .map(|k| comps[k][s].at([p[1], p[2], p[3]]) * p[0].powi(k as i32))
                    .sum();
            }
        }
        out
    };
    let shift = |p: [f64; 4], a: usize, h: f64| {
        let mut q = p;
        q[a] += h;
        q
    };
    let christoffel = |p: [f64; 4], h: f64| -> [[[f64; 4]; 4]; 4] {
        let dg: Vec<Matrix4<f64>> = (0..4)
            .map(|a| (metric(shift(p, a, h)) - metric(shift(p, a, -h))) / (2.0 * h))
            .collect();
        let inv = metric(p).try_inverse().unwrap();
        let mut out = [[[0.0; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    out[a][b][c] = (0..4)
                        .map(|d| {
                            0.5 * inv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)])
                        })
                        .sum();
                }
            }
        }
        out
    };
    let fd_ricci = |p: [f64; 4], h: f64| -> Matrix4<f64> {
        let gam = christoffel(p, h);
        let dgam: Vec<[[[f64; 4]; 4]; 4]> = (0..4)
            .map(|e| {
                let plus = christoffel(shift(p, e, h), h);
                let minus = christoffel(shift(p, e, -h), h);
                let mut out = [[[0.0; 4]; 4]; 4];
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            out[a][b][c] = (plus[a][b][c] - minus[a][b][c]) / (2.0 * h);
                        }
                    }
                }
                out
            })
            .collect();
        Matrix4::from_fn(|b, d| {
            let mut acc = 0.0;
            for a in 0..4 {
                acc += dgam[a][a][b][d] - dgam[d][a][a][b];
                for e in 0..4 {
                    acc += gam[a][a][e] * gam[e][b][d] - gam[a][d][e] * gam[e][a][b];
                }
            }
            acc
        })
    };

    for idx in [0, 777, 3000, 20511] {
        let x = g.coords(idx);
        let p = [0.0, x[0], x[1], x[2]];
        let err = |h: f64| {
            let fd = fd_ricci(p, h);
            let mut e = 0.0_f64;
            for b in 0..4 {
                for d in 0..4 {
                    e = e.max((fd[(b, d)] - ric.get(b, d).coeff(0).values()[idx]).abs());
                }
            }
            e
        };
        let (e1, e2) = (err(2e-3), err(1e-3));
        assert!(e1 < 1e-3, "FD error {e1}");
        let ratio = e1 / e2;
        assert!(ratio > 3.0 || e2 < 1e-9, "convergence ratio {ratio} ({e1}, {e2})");
    }
}
