mod common;

use common::*;
use fgforge::fg::{expand, geodesic_normalization, geodesic_normalize, BoundaryData};
use fgforge::geometry::einstein_residual;
use fgforge::geometry::BulkMetric;
use fgforge::series::Coefficient;
use fgforge::{FgError, ScalarField, Series, SymForm, TSeries, Tolerances};

fn cusp(n: usize, order: usize) -> TSeries<SymForm> {
    let g = grid(n);
    let mut coeffs = vec![SymForm::identity(g)];
    coeffs.extend((0..order).map(|_| SymForm::zeros(g)));
    TSeries::new(coeffs)
}

fn series_of(g: fgforge::GridSpec, coeffs: &[f64]) -> Series {
    Series::new(coeffs.iter().map(|c| ScalarField::constant(g, *c)).collect())
}

#[test]
fn unit_factor_is_the_identity() {
    let g = grid(8);
    let mut r = rng(3);
    let g_t = random_tangential(g, &mut r, 4, 0.05);
    let out = geodesic_normalize(&g_t, &Series::constant(g, 4, 1.0)).unwrap();
    for k in 0..=4 {
        let d = out.coeff(k).sub(g_t.coeff(k)).sup_norm();
        assert!(d <= 1e-15, "order {k}: {d}");
    }
}

#[test]
fn eikonal_holds_for_linear_factor() {
    let g = grid(8);
    let k = 6;
    let u = series_of(g, &[1.0, 1.0]);
    let n = geodesic_normalization(&cusp(8, k), &u).unwrap();
    assert_eq!(n.eikonal_norms.len(), k + 1);
    assert!(n.eikonal_norms.iter().all(|e| *e <= 1e-10), "{:?}", n.eikonal_norms);
    assert!(n.gauge_defect <= 1e-10);
    // t itself is already geodesic for the underlying metric, so v = 1
    for (j, c) in n.defining.coeffs().iter().enumerate() {
        let want = if j == 0 { 1.0 } else { 0.0 };
        assert!((c.values()[0] - want).abs() <= 1e-12, "order {j}");
    }
}

#[test]
fn cusp_stays_einstein_after_normalization() {
    let g = grid(8);
    let k = 6;
    let u = series_of(g, &[1.0, 0.0, 0.1]);
    let out = geodesic_normalize(&cusp(8, k), &u).unwrap();
    let res = einstein_residual(&BulkMetric::riemannian(out.clone()).unwrap()).unwrap();
    let norms = res.order_norms();
    assert!(norms[..=k - 3].iter().all(|n| *n <= 1e-9), "{norms:?}");
    for j in 1..=k {
        assert!(out.coeff(j).sup_norm() <= 1e-12);
    }
}

#[test]
fn position_dependent_factor_recovers_the_geodesic_metric() {
    // The same Einstein metric has a unique geodesic compactification with
    // boundary metric γ, so normalizing u²ḡ must return ḡ.
    let g = grid(16);
    let tol = Tolerances::default();
    let mut r = rng(11);
    let gamma = random_form(g, &mut r, 1.0, 0.02);
    let e = expand(&BoundaryData::new(gamma, SymForm::zeros(g), 4).unwrap(), &tol).unwrap();
    let g_t = TSeries::new(e.coeffs().to_vec());
    let u = Series::new(vec![
        ScalarField::constant(g, 1.0),
        ScalarField::from_fn(g, |x| 0.2 * x[0].cos()),
        ScalarField::from_fn(g, |x| 0.1 * (x[1] + x[2]).sin()),
    ]);
    let n = geodesic_normalization(&g_t, &u).unwrap();
    assert!(n.eikonal_norms.iter().all(|e| *e <= 1e-10), "{:?}", n.eikonal_norms);
    assert!(n.gauge_defect <= 1e-9, "{}", n.gauge_defect);
    for k in 0..=4 {
        let d = n.tangential.coeff(k).sub(g_t.coeff(k)).sup_norm();
        assert!(d <= 1e-9, "order {k}: {d}");
    }
}

#[test]
fn non_unit_leading_factor_is_rejected() {
    let g = grid(8);
    let u = series_of(g, &[2.0, 0.0]);
    assert!(matches!(
        geodesic_normalize(&cusp(8, 3), &u),
        Err(FgError::NonUnitConformalFactor(d)) if (d - 1.0).abs() < 1e-15
    ));
}
