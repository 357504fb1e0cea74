//! Machine-readable run report. Everything except `timing_seconds` is a
//! pure function of the job and the thread count.

use fgforge::coeff_file::CoefficientFile;
use fgforge::ellipticity::{ComplementingReport, DegreeReport};
use fgforge::fg::{FGExpansion, G2Resolution};
use fgforge::geometry::boundary::BoundaryIdentityReport;
use fgforge::field::FourierMode;
use serde::Serialize;

pub const REPORT_FORMAT: &str = "fgforge-report";

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub format: &'static str,
    pub command: String,
    pub threads: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<ExpansionSummary>,
    /// Which reading of the `g₍₂₎` closed form the data agree with; `null`
    /// when the run has no boundary metric.
    pub g2_formula_resolution: Option<G2Resolution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintNorms>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<ResidualReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bach: Option<NormsCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_identities: Option<BoundaryIdentityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature_decay: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wick: Option<WickReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ellipticity: Option<EllipticityReport>,
    pub self_checks: Vec<SelfCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_seconds: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ConstraintViolation,
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ConstraintViolation => 2,
            Status::NumericalFailure => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionSummary {
    pub grid: usize,
    pub order: usize,
    pub signature: f64,
    pub coefficients: Vec<OrderSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderSummary {
    pub order: usize,
    pub sup_norm: f64,
    pub components: Vec<ComponentSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentSummary {
    pub component: String,
    pub sup_norm: f64,
    pub mean: f64,
    pub modes: Vec<FourierMode>,
}

impl ExpansionSummary {
    pub fn of(e: &FGExpansion) -> Self {
        let file = CoefficientFile::from_expansion(e);
        Self {
            grid: file.grid,
            order: file.order,
            signature: file.signature,
            coefficients: file
                .coefficients
                .into_iter()
                .map(|block| OrderSummary {
                    order: block.order,
                    sup_norm: block.components.iter().map(|c| c.sup_norm).fold(0.0, f64::max),
                    components: block
                        .components
                        .into_iter()
                        .map(|c| ComponentSummary {
                            component: c.component,
                            sup_norm: c.sup_norm,
                            mean: c.mean,
                            modes: c.modes,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstraintNorms {
    pub trace_norm: f64,
    pub divergence_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    /// Sup norm of each Einstein residual coefficient.
    pub order_norms: Vec<f64>,
    /// Orders `0..=audited_through` are held to `bound`.
    pub audited_through: usize,
    pub bound: f64,
    /// Residual-vs-`t` table and its log-log slope.
    pub ts: Vec<f64>,
    pub evaluated_norms: Vec<f64>,
    /// `null` when the residual vanishes at every sample point.
    pub fitted_order: Option<f64>,
    pub exact: bool,
    pub expected_order: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormsCheck {
    pub order_norms: Vec<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub ts: Vec<f64>,
    /// Largest `|K + 1|` over the coordinate planes at each `t`.
    pub sup_deviation: Vec<f64>,
    /// `log₂` ratio of successive deviations; `null` when both vanish.
    pub fitted_order: Option<f64>,
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WickReport {
    /// `sign(⟨g₍ₖ₎^{Lor}, g₍ₖ₎^{Riem}⟩)` for each order with `g₍ₖ₎ ≠ 0`.
    pub sign_pattern: Vec<(usize, i8)>,
    pub sign_rule_defects: Vec<(usize, f64)>,
    pub residual_order_norms: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    pub seed: u64,
    pub degenerate: bool,
    pub samples: Vec<EllipticitySample>,
    pub pass_count: usize,
    pub degree_invariants: DegreeReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticitySample {
    pub xi: [f64; 3],
    #[serde(flatten)]
    pub check: ComplementingReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub bound: f64,
}

impl SelfCheck {
    pub fn at_most(name: &'static str, value: f64, bound: f64) -> Self {
        Self { name, pass: value <= bound, value, bound }
    }

    pub fn at_least(name: &'static str, value: f64, bound: f64) -> Self {
        Self { name, pass: value >= bound, value, bound }
    }
}

impl RunReport {
    pub fn new(command: &str, threads: usize) -> Self {
        Self {
            format: REPORT_FORMAT,
            command: command.into(),
            threads,
            status: Status::Ok,
            error: None,
            expansion: None,
            g2_formula_resolution: None,
            constraints: None,
            residual: None,
            bach: None,
            boundary_identities: None,
            curvature_decay: None,
            wick: None,
            ellipticity: None,
            self_checks: Vec::new(),
            timing_seconds: None,
        }
    }

    pub fn fail(&mut self, status: Status, kind: &str, message: String) {
        self.status = status;
        self.error = Some(ErrorReport { kind: kind.into(), message });
    }

    /// Mark the run failed if any self-check failed and no error is set yet.
    pub fn settle(&mut self) {
        if self.error.is_none() {
            if let Some(c) = self.self_checks.iter().find(|c| !c.pass) {
                let message = format!("{} = {:e} violates bound {:e}", c.name, c.value, c.bound);
                self.fail(Status::NumericalFailure, "self_check", message);
            }
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}
