//! Declarative job input.
//!
//! ```json
//! {
//!   "command": "expand",
//!   "grid": 16,
//!   "order": 6,
//!   "tolerances": { "tt_tol": 1e-10 },
//!   "gamma": {
//!     "constant": { "11": 1.0, "22": 1.0, "33": 1.0 },
//!     "modes": [
//!       { "component": "12", "wavevector": [1, 0, 0], "amplitude_cos": 0.01, "amplitude_sin": 0.0 }
//!     ]
//!   },
//!   "sigma": { "constant": { "11": -0.6667, "22": 0.3333, "33": 0.3333 } },
//!   "output": "coefficients.json"
//! }
//! ```
//!
//! `gamma` defaults to the flat metric and `sigma` to zero. Instead of
//! boundary data a job may name a reference metric,
//! `"reference": { "name": "ads_schwarzschild_planar", "mass": 0.5 }`, whose
//! `g₍₀₎` and `g₍₃₎` are then used as `(γ, σ)`.

use std::collections::BTreeMap;

use fgforge::fg::{reference, BoundaryData};
use fgforge::symform::parse_component;
use fgforge::{FourierMode, GridSpec, ScalarField, SymForm, Tolerances};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    #[serde(default = "default_command")]
    pub command: String,
    pub grid: usize,
    pub order: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub gamma: Option<FieldSpec>,
    pub sigma: Option<FieldSpec>,
    pub reference: Option<ReferenceSpec>,
    pub output: Option<String>,
}

fn default_command() -> String {
    "expand".into()
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default)]
    pub constant: BTreeMap<String, f64>,
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub component: String,
    pub wavevector: [i32; 3],
    #[serde(default)]
    pub amplitude_cos: f64,
    #[serde(default)]
    pub amplitude_sin: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    pub name: String,
    #[serde(default)]
    pub mass: f64,
}

/// A malformed job, reported with exit code 1.
#[derive(Debug)]
pub struct SpecError(pub String);

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl JobSpec {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| SpecError(format!("job spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let grid = self.grid_spec()?;
        if self.order < 3 {
            return Err(SpecError(format!("order must be at least 3, got {}", self.order)));
        }
        if self.reference.is_some() && (self.gamma.is_some() || self.sigma.is_some()) {
            return Err(SpecError("give either boundary data or a reference, not both".into()));
        }
        let limit = grid.band_limit() as i32;
        for (name, field) in [("gamma", &self.gamma), ("sigma", &self.sigma)] {
            let Some(field) = field else { continue };
            for label in field.constant.keys() {
                component(label).map_err(|e| SpecError(format!("{name}: {e}")))?;
            }
            for m in &field.modes {
                component(&m.component).map_err(|e| SpecError(format!("{name}: {e}")))?;
                if m.wavevector.iter().any(|k| k.abs() > limit) {
                    return Err(SpecError(format!(
                        "{name}: wavevector {:?} exceeds the band limit {limit} for grid {}",
                        m.wavevector,
                        grid.n_points()
                    )));
                }
                if !(m.amplitude_cos.is_finite() && m.amplitude_sin.is_finite()) {
                    return Err(SpecError(format!("{name}: non-finite amplitude")));
                }
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec, SpecError> {
        GridSpec::new(self.grid).map_err(|e| SpecError(e.to_string()))
    }

    /// Boundary data `(γ, σ)` for an expansion job.
    pub fn boundary_data(&self) -> Result<BoundaryData, SpecError> {
        let grid = self.grid_spec()?;
        let (gamma, sigma) = match &self.reference {
            Some(r) => {
                let (_, e) = reference(&r.name, r.mass, grid, 3).map_err(|e| SpecError(e.to_string()))?;
                (e.coeff(0).clone(), e.coeff(3).clone())
            }
            None => {
                let gamma = match &self.gamma {
                    Some(f) => build_field(grid, f),
                    None => SymForm::identity(grid),
                };
                let sigma = match &self.sigma {
                    Some(f) => build_field(grid, f),
                    None => SymForm::zeros(grid),
                };
                (gamma, sigma)
            }
        };
        BoundaryData::new(gamma, sigma, self.order).map_err(|e| SpecError(e.to_string()))
    }
}

fn component(label: &str) -> Result<(usize, usize), String> {
    parse_component(label).ok_or_else(|| format!("unknown component {label:?}"))
}

fn build_field(grid: GridSpec, spec: &FieldSpec) -> SymForm {
    SymForm::from_fn(grid, |i, j| {
        let matches = |label: &str| {
            let (a, b) = component(label).expect("validated");
            (a.min(b), a.max(b)) == (i, j)
        };
        let constant = spec.constant.iter().filter(|(l, _)| matches(l)).map(|(_, v)| v).sum();
        let modes: Vec<FourierMode> = spec
            .modes
            .iter()
            .filter(|m| matches(&m.component))
            .map(|m| FourierMode {
                wavevector: m.wavevector,
                cos: m.amplitude_cos,
                sin: m.amplitude_sin,
            })
            .collect();
        ScalarField::from_modes(grid, constant, &modes)
    })
}
