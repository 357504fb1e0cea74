//! Geodesic-gauge bulk metrics `ḡ = ε dt² + g_t` and their conversions.

use crate::error::{FgError, Result};
use crate::field::{GridSpec, ScalarField};
use crate::series::{Series, TSeries};
use crate::symform::SymForm;

use super::tensor::SymTensor;

/// `ḡ = ε dt² + g_t`, with `ε = +1` (Riemannian) or `ε = −1` (Lorentzian).
#[derive(Debug, Clone, PartialEq)]
pub struct BulkMetric {
    signature: f64,
    g_t: TSeries<SymForm>,
}

impl BulkMetric {
    pub fn new(signature: f64, g_t: TSeries<SymForm>) -> Result<Self> {
        if signature != 1.0 && signature != -1.0 {
            return Err(FgError::InvalidParameter(format!(
                "signature must be +1 or -1, got {signature}"
            )));
        }
        g_t.coeff(0).check_positive_definite()?;
        Ok(Self { signature, g_t })
    }

    pub fn riemannian(g_t: TSeries<SymForm>) -> Result<Self> {
        Self::new(1.0, g_t)
    }

    /// `ε dt² + δ` truncated at `order`.
    pub fn flat(grid: GridSpec, order: usize, signature: f64) -> Self {
        let mut coeffs = vec![SymForm::zeros(grid); order + 1];
        coeffs[0] = SymForm::identity(grid);
        Self {
            signature,
            g_t: TSeries::new(coeffs),
        }
    }

    pub fn signature(&self) -> f64 {
        self.signature
    }

    pub fn tangential(&self) -> &TSeries<SymForm> {
        &self.g_t
    }

    pub fn order(&self) -> usize {
        self.g_t.order()
    }

    pub fn grid(&self) -> GridSpec {
        self.g_t.coeff(0).grid()
    }

    /// The full 4×4 series tensor.
    pub fn to_tensor(&self) -> SymTensor {
        let grid = self.grid();
        let order = self.order();
        SymTensor::from_fn(4, |a, b| match (a, b) {
            (0, 0) => Series::constant(grid, order, self.signature),
            (0, _) => Series::zeros(grid, order),
            (i, j) => Series::new(
                self.g_t
                    .coeffs()
                    .iter()
                    .map(|h| h.get(i - 1, j - 1).clone())
                    .collect(),
            ),
        })
    }
}

/// The physical metric `t⁻²ḡ` re-expanded as a series in `τ = t − t₀`,
/// truncated at `order`. The input is treated as the polynomial given by its
/// stored coefficients.
pub fn physical_metric_about(gbar: &SymTensor, t0: f64, order: usize) -> Result<SymTensor> {
    if t0 <= 0.0 {
        return Err(FgError::InvalidParameter(format!(
            "expansion point must be interior, got t0 = {t0}"
        )));
    }
    let grid = gbar.grid();
    // (t0 + τ)⁻² = Σ (m+1)(−1)^m t0^{−2−m} τ^m
    let weight = Series::new(
        (0..=order)
            .map(|m| {
                let c = (m as f64 + 1.0) * (-1.0_f64).powi(m as i32) * t0.powi(-2 - m as i32);
                ScalarField::constant(grid, c)
            })
            .collect(),
    );
    Ok(gbar.map(|s| retaylor(s, t0, order).mul_trunc(&weight)))
}

/// Coefficients of `p(t₀ + τ)` in powers of `τ`, truncated at `order`.
pub fn retaylor(p: &Series, t0: f64, order: usize) -> Series {
    let grid = p.grid();
    let coeffs = (0..=order)
        .map(|m| {
            let mut acc = ScalarField::zeros(grid);
            for k in m..=p.order() {
                let c = p.coeff(k);
                if !c.is_zero() {
                    acc.axpy(binomial(k, m) * t0.powi((k - m) as i32), c);
                }
            }
            acc
        })
        .collect();
    Series::new(coeffs)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retaylor_of_a_cubic() {
        let g = GridSpec::new(8).unwrap();
        let p = Series::new(
            [1.0, 2.0, 0.0, 3.0]
                .iter()
                .map(|v| ScalarField::constant(g, *v))
                .collect(),
        );
        let q = retaylor(&p, 0.5, 3);
        for tau in [0.0, 0.1, -0.2] {
            let lhs = p.evaluate(0.5 + tau).values()[0];
            let rhs = q.evaluate(tau).values()[0];
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
    }
}
