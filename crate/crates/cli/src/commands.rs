//! Subcommand drivers. Each returns a report; errors in the input itself
//! surface as [`InputError`] and map to exit code 1.

use fgforge::ellipticity::{
    assemble_boundary_symbol, complementing_check, complementing_check_degenerate,
    degree_invariants, CotangentDatum,
};
use fgforge::fg::data::tt_report;
use fgforge::fg::solver::{
    audited_residual_order, evaluated_residual_norms, fitted_order, residual_of, resolve_g2,
};
use fgforge::fg::{expand, reference, wick_rotate, AdsSchwarzschildSeries, FGExpansion};
use fgforge::geometry::operators::bach;
use fgforge::geometry::{boundary_identities_check, physical_metric_about, Chart, Curvature4};
use fgforge::series::Coefficient;
use fgforge::{FgError, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::*;
use crate::spec::{JobSpec, SpecError};

pub type InputError = SpecError;

/// Sample points of the residual-vs-`t` table.
pub const RESIDUAL_TS: [f64; 3] = [0.1, 0.05, 0.025];
/// Sample points of the curvature-decay fit.
pub const DECAY_TS: [f64; 2] = [0.1, 0.05];
/// Smallest accepted `log₂` ratio for the `|K + 1| = O(t²)` decay.
pub const DECAY_MIN_ORDER: f64 = 1.8;
/// Bach and boundary-identity bounds, relative to the coefficient scale.
pub const BACH_TOL: f64 = 1e-8;
pub const BOUNDARY_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-13;

fn coefficient_scale(e: &FGExpansion) -> f64 {
    e.coefficient_norms().into_iter().fold(1.0, f64::max)
}

fn error_kind(e: &FgError) -> &'static str {
    match e {
        FgError::OrderMismatch { .. } => "order_mismatch",
        FgError::GridMismatch { .. } => "grid_mismatch",
        FgError::InvalidGrid(_) => "invalid_grid",
        FgError::SingularLeading { .. } => "singular_leading",
        FgError::NotPositiveDefinite { .. } => "not_positive_definite",
        FgError::CancellationFailure { .. } => "cancellation_failure",
        FgError::ConstraintViolation { .. } => "constraint_violation",
        FgError::SingularIndicial { .. } => "singular_indicial",
        FgError::NonAffineProbe { .. } => "non_affine_probe",
        FgError::ResidualAudit { .. } => "residual_audit",
        FgError::NonUnitConformalFactor(_) => "non_unit_conformal_factor",
        FgError::UnknownReference(_) => "unknown_reference",
        FgError::InvalidParameter(_) => "invalid_parameter",
        FgError::Format(_) => "format",
    }
}

fn record_error(report: &mut RunReport, e: &FgError, tol: &Tolerances) {
    if let FgError::ConstraintViolation {
        trace_norm,
        divergence_norm,
        obstruction_norm,
    } = e
    {
        let mut violated = Vec::new();
        if *trace_norm > tol.tt_tol {
            violated.push(format!("trace constraint |tr σ| = {trace_norm:.3e}"));
        }
        if *divergence_norm > tol.tt_tol {
            violated.push(format!("divergence constraint |δσ| = {divergence_norm:.3e}"));
        }
        if violated.is_empty() {
            violated.push(format!("order-3 obstruction {obstruction_norm:.3e}"));
        }
        report.constraints = Some(ConstraintNorms {
            trace_norm: *trace_norm,
            divergence_norm: *divergence_norm,
        });
        report.fail(
            Status::ConstraintViolation,
            error_kind(e),
            format!("violated: {}", violated.join("; ")),
        );
    } else {
        report.fail(Status::NumericalFailure, error_kind(e), e.to_string());
    }
}

/// Sup over coordinate planes of `|K + ε|` for the physical metric at `t`.
fn curvature_deviation(e: &FGExpansion, t: f64) -> Result<f64, FgError> {
    let phys = physical_metric_about(&e.to_bulk().to_tensor(), t, 2)?;
    let curv = Curvature4::new(Chart::Bulk, &phys)?;
    let eps = e.signature();
    let mut worst = 0.0_f64;
    for c in 0..4 {
        for d in c + 1..4 {
            let k = curv.sectional(c, d);
            worst = worst.max(k.values().iter().map(|v| (v + eps).abs()).fold(0.0, f64::max));
        }
    }
    Ok(worst)
}

fn decay_fit(e: &FGExpansion) -> Result<DecayFit, FgError> {
    let sup_deviation = DECAY_TS
        .iter()
        .map(|t| curvature_deviation(e, *t))
        .collect::<Result<Vec<_>, _>>()?;
    let exact = sup_deviation.iter().all(|d| *d <= ZERO_TOL);
    let fitted_order = (!exact).then(|| (sup_deviation[0] / sup_deviation[1]).log2());
    Ok(DecayFit {
        ts: DECAY_TS.to_vec(),
        sup_deviation,
        fitted_order,
        exact,
    })
}

/// Every audit that only needs the coefficients.
pub fn audit_expansion(report: &mut RunReport, e: &FGExpansion, tol: &Tolerances) {
    if let Err(err) = try_audit(report, e, tol) {
        record_error(report, &err, tol);
    }
    report.settle();
}

fn try_audit(report: &mut RunReport, e: &FGExpansion, tol: &Tolerances) -> Result<(), FgError> {
    let scale = coefficient_scale(e);
    report.expansion = Some(ExpansionSummary::of(e));
    if e.order() >= 2 {
        report.g2_formula_resolution = Some(resolve_g2(e.coeff(0), e.coeff(2))?);
    }
    if e.order() >= 3 {
        let tt = tt_report(e.coeff(0), e.coeff(3))?;
        report.constraints = Some(ConstraintNorms {
            trace_norm: tt.trace_norm,
            divergence_norm: tt.divergence_norm,
        });
        report.self_checks.push(SelfCheck::at_most("trace_constraint", tt.trace_norm, tol.tt_tol));
        report
            .self_checks
            .push(SelfCheck::at_most("divergence_constraint", tt.divergence_norm, tol.tt_tol));
    }

    let order_norms = residual_of(e.coeffs(), e.signature(), tol)?.order_norms();
    let bound = tol.residual_tol * scale;
    let evaluated = evaluated_residual_norms(e, &RESIDUAL_TS, 4, tol)?;
    let exact = evaluated.iter().all(|n| *n <= ZERO_TOL);
    let expected = e.order() as f64 - 2.0;
    let fitted = if exact { None } else { Some(fitted_order(&RESIDUAL_TS, &evaluated)) };
    let audited = &order_norms[..=audited_residual_order(e.order()).min(order_norms.len() - 1)];
    let failing = audited.iter().enumerate().find(|(_, n)| **n > bound);
    report.self_checks.push(SelfCheck::at_most(
        "einstein_residual",
        audited.iter().copied().fold(0.0, f64::max),
        bound,
    ));
    if let Some(p) = fitted {
        report.self_checks.push(SelfCheck::at_least("residual_order_fit", p, expected - 0.5));
    }
    report.residual = Some(ResidualReport {
        order_norms: order_norms.clone(),
        audited_through: audited_residual_order(e.order()),
        bound,
        ts: RESIDUAL_TS.to_vec(),
        evaluated_norms: evaluated,
        fitted_order: fitted,
        exact,
        expected_order: expected,
    });
    if let Some((order, norm)) = failing {
        report.fail(
            Status::NumericalFailure,
            "residual_audit",
            format!("Einstein residual audit fails at order {order}: {norm:.3e} > {bound:.1e}"),
        );
    }

    let curv = Curvature4::new(Chart::Bulk, &e.to_bulk().to_tensor())?;
    let bach_norms = bach(&curv).order_norms();
    let bach_bound = BACH_TOL * scale;
    report.self_checks.push(SelfCheck::at_most(
        "bach_flat",
        bach_norms.iter().copied().fold(0.0, f64::max),
        bach_bound,
    ));
    report.bach = Some(NormsCheck {
        order_norms: bach_norms,
        bound: bach_bound,
    });

    if e.signature() > 0.0 {
        let b = boundary_identities_check(&e.to_bulk())?;
        let bound = BOUNDARY_TOL * scale;
        report
            .self_checks
            .push(SelfCheck::at_most("boundary_tangential_identity", b.tangential_corrected, bound));
        report.self_checks.push(SelfCheck::at_most("boundary_mixed_identity", b.mixed, bound));
        report.boundary_identities = Some(b);
    }

    let fit = decay_fit(e)?;
    if let Some(p) = fit.fitted_order {
        report.self_checks.push(SelfCheck::at_least("curvature_decay", p, DECAY_MIN_ORDER));
    }
    report.curvature_decay = Some(fit);
    Ok(())
}

/// Result of a command: its report plus an optional coefficient file.
pub struct Outcome {
    pub report: RunReport,
    pub coefficients: Option<FGExpansion>,
}

pub fn cmd_expand(spec: &JobSpec, threads: usize) -> Result<Outcome, InputError> {
    let data = spec.boundary_data()?;
    let tol = spec.tolerances;
    let mut report = RunReport::new("expand", threads);
    match expand(&data, &tol) {
        Ok(e) => {
            audit_expansion(&mut report, &e, &tol);
            if let Some(r) = &e.diagnostics.g2_resolution {
                report.g2_formula_resolution = Some(r.clone());
            }
            Ok(Outcome {
                report,
                coefficients: Some(e),
            })
        }
        Err(err) => {
            record_error(&mut report, &err, &tol);
            if data.order >= 2 {
                report.g2_formula_resolution = fgforge::fg::compute_g2(&data.gamma, &tol).ok().map(|r| r.1);
            }
            Ok(Outcome {
                report,
                coefficients: None,
            })
        }
    }
}

pub fn cmd_verify(e: &FGExpansion, tol: &Tolerances, threads: usize) -> RunReport {
    let mut report = RunReport::new("verify", threads);
    audit_expansion(&mut report, e, tol);
    report
}

/// `sign⟨a, b⟩` summed over components and grid points, or 0 if `b ≈ 0`.
fn relative_sign(a: &fgforge::SymForm, b: &fgforge::SymForm) -> i8 {
    if b.sup_norm() <= ZERO_TOL {
        return 0;
    }
    let dot: f64 = a
        .components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| x.values().iter().zip(y.values()).map(|(p, q)| p * q).sum::<f64>())
        .sum();
    if dot > 0.0 {
        1
    } else {
        -1
    }
}

pub fn cmd_wick(e: &FGExpansion, tol: &Tolerances, threads: usize) -> Result<Outcome, InputError> {
    if e.signature() != 1.0 {
        return Err(SpecError("wick expects a Riemannian coefficient file".into()));
    }
    let mut report = RunReport::new("wick", threads);
    let input_norms = residual_of(e.coeffs(), 1.0, tol).map(|r| r.order_norms());
    let bound = tol.residual_tol * coefficient_scale(e);
    match input_norms {
        Ok(norms) => {
            let audited = &norms[..=audited_residual_order(e.order()).min(norms.len() - 1)];
            if let Some((order, norm)) = audited.iter().enumerate().find(|(_, n)| **n > bound) {
                report.fail(
                    Status::NumericalFailure,
                    "residual_audit",
                    format!("input fails the Einstein residual audit at order {order}: {norm:.3e} > {bound:.1e}"),
                );
                return Ok(Outcome {
                    report,
                    coefficients: None,
                });
            }
        }
        Err(err) => {
            record_error(&mut report, &err, tol);
            return Ok(Outcome {
                report,
                coefficients: None,
            });
        }
    }
    match wick_rotate(e, tol) {
        Ok(lor) => {
            audit_expansion(&mut report, &lor, tol);
            report.wick = Some(WickReport {
                sign_pattern: (0..=lor.order())
                    .map(|k| (k, relative_sign(lor.coeff(k), e.coeff(k))))
                    .filter(|(_, s)| *s != 0)
                    .collect(),
                sign_rule_defects: lor.diagnostics.sign_rule_defects.clone(),
                residual_order_norms: lor.diagnostics.residual_order_norms.clone(),
            });
            Ok(Outcome {
                report,
                coefficients: Some(lor),
            })
        }
        Err(err) => {
            record_error(&mut report, &err, tol);
            Ok(Outcome {
                report,
                coefficients: None,
            })
        }
    }
}

/// Deterministic tangential covectors with `0.25 ≤ |ξ| ≤ 1.7`.
pub fn sample_covectors(seed: u64, n: usize) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let xi: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm >= 0.25 {
            out.push(xi);
        }
    }
    out
}

pub fn cmd_ellipticity(n_samples: usize, seed: u64, degenerate: bool, threads: usize) -> RunReport {
    let mut report = RunReport::new("ellipticity", threads);
    let samples: Vec<EllipticitySample> = sample_covectors(seed, n_samples)
        .into_iter()
        .map(|xi| {
            let d = CotangentDatum::euclidean(xi).expect("sampled covectors are nonzero");
            let check = if degenerate {
                complementing_check_degenerate(&d)
            } else {
                complementing_check(&d)
            };
            EllipticitySample { xi, check }
        })
        .collect();
    let pass_count = samples.iter().filter(|s| s.check.pass).count();
    let reference = CotangentDatum::euclidean([1.0, 0.0, 0.0]).expect("unit covector");
    let mut symbol = assemble_boundary_symbol(&reference);
    if degenerate {
        symbol = symbol.degenerate();
    }
    let degrees = degree_invariants(&symbol);
    if !degenerate {
        report.self_checks.push(SelfCheck::at_least(
            "complementing_pass_fraction",
            pass_count as f64 / n_samples.max(1) as f64,
            1.0,
        ));
        report.self_checks.push(SelfCheck::at_least(
            "degree_invariants",
            f64::from(u8::from(degrees.holds())),
            1.0,
        ));
    }
    report.ellipticity = Some(EllipticityReport {
        seed,
        degenerate,
        samples,
        pass_count,
        degree_invariants: degrees,
    });
    report.settle();
    report
}

pub fn cmd_reference(
    name: &str,
    mass: f64,
    grid: usize,
    order: usize,
    tol: &Tolerances,
    threads: usize,
) -> Result<Outcome, InputError> {
    let grid = fgforge::GridSpec::new(grid).map_err(|e| SpecError(e.to_string()))?;
    let (_, e) = reference(name, mass, grid, order).map_err(|e| SpecError(e.to_string()))?;
    let mut report = RunReport::new("reference", threads);
    if name == "ads_schwarzschild_planar" {
        match AdsSchwarzschildSeries::new(mass, order.max(3)) {
            Ok(s) => report
                .self_checks
                .push(SelfCheck::at_most("oracle_einstein_defect", s.einstein_defect(), 1e-12)),
            Err(err) => record_error(&mut report, &err, tol),
        }
    }
    audit_expansion(&mut report, &e, tol);
    Ok(Outcome {
        report,
        coefficients: Some(e),
    })
}
