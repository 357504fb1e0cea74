mod common;

use std::time::Instant;

use common::*;
use fgforge::fg::reference::ads_w_of_t;
use fgforge::fg::solver::{probe_step, wick_sign};
use fgforge::fg::{
    compute_g2, expand, expand_unchecked, reference, solve_order, validate_tt, wick_rotate,
    AdsSchwarzschildSeries, BoundaryData,
};
use fgforge::geometry::boundary_curvature;
use fgforge::series::Coefficient;
use fgforge::{FgError, ScalarField, SymForm, Tolerances};

#[test]
fn cusp_expansion_is_trivial() {
    let g = grid(16);
    let tol = Tolerances::default();
    let start = Instant::now();
    let data = BoundaryData::new(SymForm::identity(g), SymForm::zeros(g), 8).unwrap();
    let e = expand(&data, &tol).unwrap();
    eprintln!("cusp K=8 at 16^3: {:?}", start.elapsed());
    for k in 1..=8 {
        assert!(e.coeff(k).sup_norm() <= 1e-12, "order {k}");
    }
    assert!(e.diagnostics.residual_order_norms.iter().all(|n| *n <= 1e-12));
}

#[test]
fn black_hole_oracle_is_einstein() {
    let s = AdsSchwarzschildSeries::new(0.5, 30).unwrap();
    assert!(s.einstein_defect() <= 1e-12, "defect {}", s.einstein_defect());
    assert!((s.g_tau[3] + 2.0 / 3.0).abs() < 1e-15);
    assert!((s.g_x[3] - 1.0 / 3.0).abs() < 1e-15);
    for k in [1, 2, 4, 5, 7, 8] {
        assert_eq!(s.g_x[k], 0.0);
        assert_eq!(s.g_tau[k], 0.0);
    }
    // series agrees with the Newton-inverted closed form
    let t = 0.3;
    let w = ads_w_of_t(0.5, t);
    let series_w: f64 = s.w.iter().rev().fold(0.0, |acc, c| acc * t + c);
    assert!((w - series_w).abs() < 1e-12);
}

#[test]
fn expansion_matches_black_hole_oracle() {
    let g = grid(8);
    let tol = Tolerances::default();
    let m = 0.5;
    let sigma = SymForm::diag(g, [-4.0 * m / 3.0, 2.0 * m / 3.0, 2.0 * m / 3.0]);
    let start = Instant::now();
    let e = expand(&BoundaryData::new(SymForm::identity(g), sigma, 6).unwrap(), &tol).unwrap();
    eprintln!("black hole K=6 at 8^3: {:?}", start.elapsed());
    let oracle = AdsSchwarzschildSeries::new(m, 6).unwrap();
    for k in 0..=6 {
        let want = SymForm::diag(g, [oracle.g_tau[k], oracle.g_x[k], oracle.g_x[k]]);
        let diff = e.coeff(k).sub(&want).sup_norm();
        let scale = want.sup_norm();
        let err = if scale > 1e-12 { diff / scale } else { diff };
        assert!(err <= 1e-8, "order {k}: error {err}");
    }
}

#[test]
fn order_three_is_the_indicial_root() {
    let g = grid(8);
    let tol = Tolerances::default();
    let coeffs = vec![SymForm::identity(g), SymForm::zeros(g), SymForm::zeros(g)];
    assert!(matches!(
        solve_order(&coeffs, 3, 1.0, &tol),
        Err(FgError::SingularIndicial { order: 3, .. })
    ));
    let step = probe_step(&coeffs, 3, 1.0, &tol).unwrap();
    assert!(step.range_obstruction(&tol) <= 1e-12);
}

#[test]
fn trace_injection_is_rejected() {
    let g = grid(8);
    let tol = Tolerances::default();
    let sigma = SymForm::diag(g, [0.01, 0.0, 0.0]);
    let data = BoundaryData::new(SymForm::identity(g), sigma, 4).unwrap();
    match expand(&data, &tol) {
        Err(FgError::ConstraintViolation { trace_norm, .. }) => {
            assert!((trace_norm - 0.01).abs() < 1e-12)
        }
        other => panic!("unexpected {other:?}"),
    }
    match expand_unchecked(&data, &tol) {
        Err(FgError::ConstraintViolation { obstruction_norm, .. }) => {
            assert!(obstruction_norm >= 1e-3, "obstruction {obstruction_norm}")
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn validate_tt_examples() {
    let g = grid(8);
    let tol = 1e-10;
    let gamma = SymForm::identity(g);
    assert!(validate_tt(&gamma, &SymForm::zeros(g), tol).is_ok());
    match validate_tt(&gamma, &gamma, tol) {
        Err(FgError::ConstraintViolation { trace_norm, .. }) => assert!((trace_norm - 3.0).abs() < 1e-14),
        other => panic!("unexpected {other:?}"),
    }
    let sigma = SymForm::diag(g, [-2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
    assert!(validate_tt(&gamma, &sigma, tol).is_ok());
}

#[test]
fn second_coefficient_of_a_sphere_like_boundary() {
    // γ = e^{2ψ}δ: compare the solved g₍₂₎ against −(Ric_γ − (s_γ/4)γ)
    // computed from the closed-form conformal curvature.
    let g = grid(32);
    let tol = Tolerances::default();
    let psi = |x: f64| 0.1 * x.cos();
    let gamma = SymForm::from_fn(g, |i, j| {
        ScalarField::from_fn(g, |x| if i == j { (2.0 * psi(x[0])).exp() } else { 0.0 })
    });
    let (g2, res) = compute_g2(&gamma, &tol).unwrap();
    let b = boundary_curvature(&gamma).unwrap();
    let want = SymForm::from_fn(g, |i, j| {
        b.ricci3
            .get(i, j)
            .sub(&b.scalar3.scale(0.25).mul(gamma.get(i, j)))
            .scale(-1.0)
    });
    assert!(g2.sub(&want).sup_norm() <= 1e-10);
    assert!(res.reading.starts_with("inner reading, scaled by 2.0"), "{res:?}");
    assert!(res.outer_mismatch > 1e-3);

    let (flat, res) = compute_g2(&SymForm::identity(grid(8)), &tol).unwrap();
    assert!(flat.sup_norm() <= 1e-14);
    assert!(res.reading.starts_with("undetermined"));
}

#[test]
fn wick_rotation_of_the_black_hole() {
    let g = grid(8);
    let tol = Tolerances::default();
    let (_, e) = reference("ads_schwarzschild_planar", 0.5, g, 9).unwrap();
    let l = wick_rotate(&e, &tol).unwrap();
    assert!(l.diagnostics.residual_order_norms.iter().all(|n| *n <= 1e-8));
    // g₍₆₎ ∝ m² is even in σ, so the plain sign rule is off by 2|g₍₆₎| there
    let oracle = AdsSchwarzschildSeries::new(0.5, 9).unwrap();
    let (k, defect) = l.diagnostics.sign_rule_defects[0];
    assert_eq!(k, 6);
    assert!((defect - 2.0 * oracle.g_tau[6].abs().max(oracle.g_x[6].abs())).abs() < 1e-8);
    assert_eq!([wick_sign(2), wick_sign(3), wick_sign(4)], [-1.0, -1.0, 1.0]);
    assert!(l.coeff(3).add(e.coeff(3)).sup_norm() == 0.0);

    let (_, cusp) = reference("cusp", 0.0, g, 6).unwrap();
    let l = wick_rotate(&cusp, &tol).unwrap();
    assert!(l.diagnostics.residual_order_norms.iter().all(|n| *n <= 1e-11));

    // flipping ε without touching g₍₂₎ is caught by the audit
    let g = grid(16);
    let gamma = SymForm::from_fn(g, |i, j| {
        ScalarField::from_fn(g, |x| if i == j { (0.2 * x[1].sin()).exp() } else { 0.0 })
    });
    let curved = expand(&BoundaryData::new(gamma, SymForm::zeros(g), 4).unwrap(), &tol).unwrap();
    assert!(curved.coeff(2).sup_norm() > 1e-2);
    let rotated = wick_rotate(&curved, &tol).unwrap();
    assert!(rotated.diagnostics.residual_order_norms.iter().all(|n| *n <= 1e-8));
    assert!(fgforge::fg::solver::audit_residual(curved.coeffs(), -1.0, &tol).is_err());
}

#[test]
fn random_boundary_expansion_is_even_below_three() {
    let g = grid(32);
    let tol = Tolerances::default();
    let mut r = rng(5);
    let gamma = random_form(g, &mut r, 1.0, 0.05);
    let e = expand(&BoundaryData::new(gamma, SymForm::zeros(g), 5).unwrap(), &tol).unwrap();
    assert!(e.coeff(1).sup_norm() == 0.0);
    assert!(e.coeff(3).sup_norm() == 0.0);
    assert!(e.coeff(5).sup_norm() <= 1e-10, "{}", e.coeff(5).sup_norm());
    assert!(e.coeff(2).sup_norm() > 1e-3);
}

#[test]
fn compactified_black_hole_is_bach_flat() {
    use fgforge::geometry::operators::{bach, bach_with_sign};
    use fgforge::geometry::{Chart, Curvature4};
    let (_, e) = reference("ads_schwarzschild_planar", 0.5, grid(8), 12).unwrap();
    let curv = Curvature4::new(Chart::Bulk, &e.to_bulk().to_tensor()).unwrap();
    let flat = bach(&curv).order_norms();
    assert_eq!(flat.len(), 9);
    assert!(flat.iter().all(|n| *n <= 1e-10), "{flat:?}");
    let wrong = bach_with_sign(&curv, -fgforge::geometry::operators::BACH_WEYL_SIGN).order_norms();
    assert!((wrong[2] - 6.0).abs() < 1e-10, "{wrong:?}");
}

#[test]
fn small_constraint_violations_are_reported() {
    let g = grid(8);
    let tol = Tolerances::default();
    let gamma = SymForm::identity(g);
    for eps in [1e-2, 1e-4] {
        let trace = SymForm::diag(g, [eps, 0.0, 0.0]);
        match expand(&BoundaryData::new(gamma.clone(), trace, 4).unwrap(), &tol) {
            Err(FgError::ConstraintViolation { trace_norm, .. }) => {
                assert!(trace_norm >= eps / 2.0 && trace_norm <= 2.0 * eps)
            }
            other => panic!("unexpected {other:?}"),
        }
        // trace-free, with (δσ)₂ = −∂₁σ₁₂ = −ε cos x₁
        let mut div = SymForm::zeros(g);
        *div.get_mut(0, 1) = ScalarField::from_fn(g, |x| eps * x[0].sin());
        match expand(&BoundaryData::new(gamma.clone(), div.clone(), 4).unwrap(), &tol) {
            Err(FgError::ConstraintViolation {
                trace_norm,
                divergence_norm,
                ..
            }) => {
                assert!(trace_norm <= 1e-15);
                assert!(divergence_norm >= eps / 2.0 && divergence_norm <= 2.0 * eps)
            }
            other => panic!("unexpected {other:?}"),
        }
        match expand_unchecked(&BoundaryData::new(gamma.clone(), div, 4).unwrap(), &tol) {
            Err(FgError::ConstraintViolation { divergence_norm, .. }) => {
                assert!(divergence_norm >= eps / 10.0)
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn residual_order_law() {
    use fgforge::fg::solver::{evaluated_residual_norms, fitted_order};
    let g = grid(16);
    let tol = Tolerances::default();
    let k = 6;
    let ts = [0.1, 0.05, 0.025];
    let gamma = band_limited_gamma(g, &mut rng(21), 0.05);
    let e = expand(&BoundaryData::new(gamma, SymForm::zeros(g), k).unwrap(), &tol).unwrap();
    let norms = evaluated_residual_norms(&e, &ts, 4, &tol).unwrap();
    let p = fitted_order(&ts, &norms);
    assert!(p >= k as f64 - 2.5, "fitted order {p}, norms {norms:?}");

    // a too-small truncation is visibly worse
    let short = fgforge::fg::FGExpansion::new(e.coeffs()[..5].to_vec(), 1.0).unwrap();
    let q = fitted_order(&ts, &evaluated_residual_norms(&short, &ts, 4, &tol).unwrap());
    assert!(q < p - 1.0, "{q} vs {p}");
}

#[test]
fn expansion_is_deterministic_and_resolution_stable() {
    let tol = Tolerances::default();
    let run = |n: usize| {
        let g = grid(n);
        (g, band_limited_gamma(g, &mut rng(8), 0.05))
    };
    let (g, gamma) = run(16);
    let data = BoundaryData::new(gamma, SymForm::zeros(g), 5).unwrap();
    let a = expand(&data, &tol).unwrap();
    let b = expand(&data, &tol).unwrap();
    for k in 0..=5 {
        let bits = |e: &fgforge::fg::FGExpansion| -> Vec<u64> {
            e.coeff(k).components().iter().flat_map(|c| c.values().iter().map(|v| v.to_bits())).collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    let (g32, gamma32) = run(32);
    let fine = expand(&BoundaryData::new(gamma32, SymForm::zeros(g32), 5).unwrap(), &tol).unwrap();
    for k in 0..=5 {
        let coarse = a.coeff(k).resample(g32);
        let d = coarse.sub(fine.coeff(k)).sup_norm();
        assert!(d <= 1e-9, "order {k}: {d}");
    }
}

#[test]
fn boundary_identities() {
    use fgforge::geometry::boundary_identities_check;
    let tol = Tolerances::default();
    for name in ["cusp", "ads_schwarzschild_planar"] {
        let (_, e) = reference(name, 0.5, grid(8), 6).unwrap();
        let r = boundary_identities_check(&e.to_bulk()).unwrap();
        assert!(r.tangential_short <= 1e-14 && r.tangential_corrected <= 1e-14 && r.mixed <= 1e-14);
    }

    let g = grid(32);
    let gamma = SymForm::from_fn(g, |i, j| {
        ScalarField::from_fn(g, |x| {
            if i == j {
                (0.2 * x[0].cos() + 0.1 * x[2].sin()).exp()
            } else {
                0.0
            }
        })
    });
    let e = expand(&BoundaryData::new(gamma, SymForm::zeros(g), 4).unwrap(), &tol).unwrap();
    let r = boundary_identities_check(&e.to_bulk()).unwrap();
    assert!(r.tangential_corrected <= 1e-9, "{r:?}");
    assert!(r.mixed <= 1e-9, "{r:?}");
    assert!(r.predicted_short_gap > 1e-3);
    assert!((r.tangential_short - r.predicted_short_gap).abs() <= 1e-9, "{r:?}");
}
