//! Self-describing JSON file holding an expansion's coefficients.
//!
//! Field values are stored as the 16-hex-digit bit patterns of the `f64`s,
//! so a write/read round trip is bit-exact. Each component also carries its
//! sup norm, mean and largest Fourier modes for human inspection; those are
//! ignored on read.

use serde::{Deserialize, Serialize};

use crate::error::{FgError, Result};
use crate::fg::FGExpansion;
use crate::field::{FourierMode, GridSpec, ScalarField};
use crate::symform::{parse_component, SymForm, SYM3_LABELS};

pub const FORMAT_NAME: &str = "fgforge-coefficients";
pub const FORMAT_VERSION: u32 = 1;
const SUMMARY_MODES: usize = 4;
const SUMMARY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFile {
    pub format: String,
    pub version: u32,
    pub grid: usize,
    pub order: usize,
    pub signature: f64,
    pub coefficients: Vec<OrderBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderBlock {
    pub order: usize,
    pub components: Vec<ComponentBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentBlock {
    pub component: String,
    pub sup_norm: f64,
    pub mean: f64,
    pub modes: Vec<FourierMode>,
    /// Space-separated hex bit patterns in grid order.
    pub values: String,
}

fn encode(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{:016x}", v.to_bits()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn decode(s: &str, expected: usize) -> Result<Vec<f64>> {
    let values = s
        .split_ascii_whitespace()
        .map(|w| {
            u64::from_str_radix(w, 16)
                .map(f64::from_bits)
                .map_err(|e| FgError::Format(format!("bad value {w:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(FgError::Format(format!(
            "expected {expected} values, found {}",
            values.len()
        )));
    }
    Ok(values)
}

impl CoefficientFile {
    pub fn from_expansion(e: &FGExpansion) -> Self {
        let coefficients = e
            .coeffs()
            .iter()
            .enumerate()
            .map(|(order, c)| OrderBlock {
                order,
                components: SYM3_LABELS
                    .iter()
                    .zip(c.components())
                    .map(|(label, f)| {
                        let (_, modes) = f.fourier_modes(SUMMARY_MODES, SUMMARY_THRESHOLD);
                        ComponentBlock {
                            component: label.to_string(),
                            sup_norm: f.sup_norm(),
                            mean: f.mean(),
                            modes,
                            values: encode(f.values()),
                        }
                    })
                    .collect(),
            })
            .collect();
        Self {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            grid: e.grid().n_points(),
            order: e.order(),
            signature: e.signature(),
            coefficients,
        }
    }

    pub fn to_expansion(&self) -> Result<FGExpansion> {
        if self.format != FORMAT_NAME || self.version != FORMAT_VERSION {
            return Err(FgError::Format(format!(
                "unsupported format {:?} version {}",
                self.format, self.version
            )));
        }
        if self.coefficients.len() != self.order + 1 {
            return Err(FgError::Format(format!(
                "order {} but {} coefficient blocks",
                self.order,
                self.coefficients.len()
            )));
        }
        let grid = GridSpec::new(self.grid)?;
        let coeffs = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, block)| {
                if block.order != k {
                    return Err(FgError::Format(format!(
                        "coefficient block {k} is labelled order {}",
                        block.order
                    )));
                }
                let mut comps: Vec<Option<ScalarField>> = vec![None; 6];
                for c in &block.components {
                    let (i, j) = parse_component(&c.component).ok_or_else(|| {
                        FgError::Format(format!("unknown component {:?}", c.component))
                    })?;
                    let s = crate::symform::sym_index(i, j, 3);
                    comps[s] = Some(ScalarField::from_values(grid, decode(&c.values, grid.len())?)?);
                }
                let comps = comps
                    .into_iter()
                    .enumerate()
                    .map(|(s, c)| {
                        c.ok_or_else(|| {
                            FgError::Format(format!("order {k} lacks component {}", SYM3_LABELS[s]))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                SymForm::from_components(comps)
            })
            .collect::<Result<Vec<_>>>()?;
        FGExpansion::new(coeffs, self.signature)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coefficient files always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| FgError::Format(e.to_string()))
    }
}

pub fn write_expansion(e: &FGExpansion) -> String {
    CoefficientFile::from_expansion(e).to_json()
}

pub fn read_expansion(s: &str) -> Result<FGExpansion> {
    CoefficientFile::from_json(s)?.to_expansion()
}
