//! Closed-form reference metrics and their expansions in the geodesic
//! defining function.
//!
//! * `cusp`: `t⁻²(dt² + δ)`, exactly hyperbolic.
//! * `cone`: `t⁻²(dt² + (1 − t²/4)²γ)`, the compactified hyperbolic cone over
//!   `γ` (Einstein only when `γ` itself has constant curvature `+1`).
//! * `ads_schwarzschild_planar`: `dr²/V + V dτ² + r²(dx² + dy²)` with
//!   `V = r² − 2m/r`, `τ` along the first torus axis. With `w = 1/r` the
//!   geodesic defining function is `t = w·exp(F(w))`,
//!   `F(w) = Σ_{n≥1} C(2n,n)4⁻ⁿ (2m)ⁿ w³ⁿ/(3n)`, and
//!   `ḡ = dt² + (t/w)²((1 − 2mw³)dτ² + dx² + dy²)`.
//!
//! The black-hole expansion is computed with one-dimensional power series:
//! `w(t)` is obtained by reverting `t = w·exp(F(w))`.

use serde::Serialize;

use crate::error::{FgError, Result};
use crate::field::GridSpec;
use crate::geometry::bulk::binomial;
use crate::symform::SymForm;

use super::solver::FGExpansion;

/// Truncated real power series helpers (coefficient vectors).
mod poly {
    pub fn mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n + 1];
        for (i, x) in a.iter().enumerate().take(n + 1) {
            if *x == 0.0 {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(n + 1 - i) {
                out[i + j] += x * y;
            }
        }
        out
    }

    /// `exp(a)` for `a₀ = 0`.
    pub fn exp(a: &[f64], n: usize) -> Vec<f64> {
        assert!(a.first().copied().unwrap_or(0.0) == 0.0);
        let mut e = vec![0.0; n + 1];
        e[0] = 1.0;
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k.min(a.len() - 1) {
                acc += j as f64 * a[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        e
    }

    /// `f(g(t))` for `g₀ = 0`.
    pub fn compose(f: &[f64], g: &[f64], n: usize) -> Vec<f64> {
        assert!(g.first().copied().unwrap_or(0.0) == 0.0);
        let mut out = vec![0.0; n + 1];
        let mut power = vec![0.0; n + 1];
        power[0] = 1.0;
        for (k, fk) in f.iter().enumerate() {
            if k > n {
                break;
            }
            if *fk != 0.0 {
                for (o, p) in out.iter_mut().zip(&power) {
                    *o += fk * p;
                }
            }
            power = mul(&power, g, n);
        }
        out
    }

    /// `1/a` for `a₀ ≠ 0`.
    pub fn recip(a: &[f64], n: usize) -> Vec<f64> {
        let mut r = vec![0.0; n + 1];
        r[0] = 1.0 / a[0];
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k.min(a.len() - 1) {
                acc += a[j] * r[k - j];
            }
            r[k] = -acc * r[0];
        }
        r
    }

    pub fn deriv(a: &[f64]) -> Vec<f64> {
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c)
            .collect()
    }

    pub fn eval(a: &[f64], t: f64) -> f64 {
        a.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

/// `F(w)` coefficients through `w^n`.
fn f_series(mass: f64, n: usize) -> Vec<f64> {
    let mut f = vec![0.0; n + 1];
    let mut j = 1;
    while 3 * j <= n {
        let c = binomial(2 * j, j) / 4f64.powi(j as i32);
        f[3 * j] = c * (2.0 * mass).powi(j as i32) / (3 * j) as f64;
        j += 1;
    }
    f
}

/// One-dimensional Taylor data of the planar black hole in the geodesic
/// defining function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdsSchwarzschildSeries {
    pub mass: f64,
    /// `w(t) = 1/r`.
    pub w: Vec<f64>,
    /// `ḡ_{ττ}(t)`.
    pub g_tau: Vec<f64>,
    /// `ḡ_{xx}(t) = ḡ_{yy}(t)`.
    pub g_x: Vec<f64>,
}

impl AdsSchwarzschildSeries {
    pub fn new(mass: f64, order: usize) -> Result<Self> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(FgError::InvalidParameter(format!(
                "black-hole mass must be non-negative, got {mass}"
            )));
        }
        let n = order;
        let f = f_series(mass, n);
        // w = t·exp(−F(w)); each pass fixes three more orders.
        let mut w = vec![0.0; n + 1];
        if n >= 1 {
            w[1] = 1.0;
        }
        for _ in 0..(n / 3 + 2) {
            let fw = poly::compose(&f, &w, n);
            let e = poly::exp(&fw.iter().map(|c| -c).collect::<Vec<_>>(), n);
            let mut next = vec![0.0; n + 1];
            next[1..].copy_from_slice(&e[..n]);
            w = next;
        }
        let fw = poly::compose(&f, &w, n);
        let g_x = poly::exp(&fw.iter().map(|c| 2.0 * c).collect::<Vec<_>>(), n);
        let w3 = poly::mul(&poly::mul(&w, &w, n), &w, n);
        let lapse: Vec<f64> = (0..=n)
            .map(|k| if k == 0 { 1.0 } else { 0.0 } - 2.0 * mass * w3[k])
            .collect();
        let g_tau = poly::mul(&g_x, &lapse, n);
        Ok(Self {
            mass,
            w,
            g_tau,
            g_x,
        })
    }

    pub fn order(&self) -> usize {
        self.g_x.len() - 1
    }

    /// Largest coefficient of the Einstein equations of the diagonal metric
    /// `t⁻²(dt² + Σ aᵢ dxᵢ²)`, written with `Hᵢ = 1 − t aᵢ'/(2aᵢ)` and
    /// `D = −t d/dt`:
    /// `Σ(DHᵢ + Hᵢ²) − 3 = 0` and `DHᵢ + Hᵢ ΣHⱼ − 3 = 0`.
    /// Orders up to `order − 1` are exact for the truncated series.
    pub fn einstein_defect(&self) -> f64 {
        let n = self.order();
        let h_of = |a: &[f64]| -> Vec<f64> {
            let ta: Vec<f64> = std::iter::once(0.0).chain(poly::deriv(a)).collect();
            let q = poly::mul(&ta, &poly::recip(a, n), n);
            (0..=n)
                .map(|k| if k == 0 { 1.0 } else { 0.0 } - 0.5 * q[k])
                .collect()
        };
        let d_of = |h: &[f64]| -> Vec<f64> {
            h.iter().enumerate().map(|(k, c)| -(k as f64) * c).collect()
        };
        let hs = [h_of(&self.g_tau), h_of(&self.g_x), h_of(&self.g_x)];
        let sum: Vec<f64> = (0..=n).map(|k| hs.iter().map(|h| h[k]).sum()).collect();
        let mut worst = 0.0_f64;
        let mut e0 = vec![0.0; n + 1];
        e0[0] = -3.0;
        for h in &hs {
            let dh = d_of(h);
            let h2 = poly::mul(h, h, n);
            let hsum = poly::mul(h, &sum, n);
            for k in 0..n {
                e0[k] += dh[k] + h2[k];
                let ei = dh[k] + hsum[k] - if k == 0 { 3.0 } else { 0.0 };
                worst = worst.max(ei.abs());
            }
        }
        for v in e0.iter().take(n) {
            worst = worst.max(v.abs());
        }
        worst
    }
}

/// Invert `t = w·exp(F(w))` by Newton's method using `dt/dw = (t/w)/√(1 − 2mw³)`.
pub fn ads_w_of_t(mass: f64, t: f64) -> f64 {
    let terms = f_series(mass, 240);
    let f = |w: f64| poly::eval(&terms, w);
    let mut w = t;
    for _ in 0..60 {
        let tw = w * f(w).exp();
        let slope = (tw / w) / (1.0 - 2.0 * mass * w.powi(3)).sqrt();
        let step = (tw - t) / slope;
        w -= step;
        if step.abs() < 1e-16 * w.abs() {
            break;
        }
    }
    w
}

/// Closed-form evaluation of a reference metric at a defining-function value.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSampler {
    Cusp,
    Cone { gamma: SymForm },
    AdsSchwarzschildPlanar { mass: f64 },
}

impl ReferenceSampler {
    /// Diagonal of the tangential metric for the x-independent references;
    /// for the cone this is the scale factor multiplying `γ`.
    pub fn tangential_diag(&self, t: f64) -> [f64; 3] {
        match self {
            ReferenceSampler::Cusp => [1.0; 3],
            ReferenceSampler::Cone { .. } => {
                let s = (1.0 - t * t / 4.0).powi(2);
                [s; 3]
            }
            ReferenceSampler::AdsSchwarzschildPlanar { mass } => {
                let w = ads_w_of_t(*mass, t);
                let a = (t / w).powi(2);
                [a * (1.0 - 2.0 * mass * w.powi(3)), a, a]
            }
        }
    }
}

pub const REFERENCE_NAMES: [&str; 3] = ["cusp", "cone", "ads_schwarzschild_planar"];

/// A reference metric: closed-form sampler plus its Taylor expansion.
pub fn reference(
    name: &str,
    mass: f64,
    grid: GridSpec,
    order: usize,
) -> Result<(ReferenceSampler, FGExpansion)> {
    let order = order.max(3);
    match name {
        "cusp" => {
            let mut coeffs = vec![SymForm::zeros(grid); order + 1];
            coeffs[0] = SymForm::identity(grid);
            Ok((ReferenceSampler::Cusp, FGExpansion::new(coeffs, 1.0)?))
        }
        "cone" => {
            let gamma = SymForm::identity(grid);
            let mut coeffs = vec![SymForm::zeros(grid); order + 1];
            // (1 − t²/4)² = 1 − t²/2 + t⁴/16
            for (k, c) in [(0, 1.0), (2, -0.5), (4, 1.0 / 16.0)] {
                if k <= order {
                    coeffs[k] = SymForm::scaled_identity(grid, c);
                }
            }
            Ok((ReferenceSampler::Cone { gamma }, FGExpansion::new(coeffs, 1.0)?))
        }
        "ads_schwarzschild_planar" => {
            let s = AdsSchwarzschildSeries::new(mass, order)?;
            let coeffs = (0..=order)
                .map(|k| SymForm::diag(grid, [s.g_tau[k], s.g_x[k], s.g_x[k]]))
                .collect();
            Ok((
                ReferenceSampler::AdsSchwarzschildPlanar { mass },
                FGExpansion::new(coeffs, 1.0)?,
            ))
        }
        other => Err(FgError::UnknownReference(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_and_recip_are_inverse_operations() {
        let a = [0.0, 0.3, -0.1, 0.05];
        let e = poly::exp(&a, 6);
        let neg: Vec<f64> = a.iter().map(|c| -c).collect();
        let prod = poly::mul(&e, &poly::exp(&neg, 6), 6);
        assert!((prod[0] - 1.0).abs() < 1e-15);
        assert!(prod[1..].iter().all(|c| c.abs() < 1e-15));
        let r = poly::recip(&e, 6);
        let one = poly::mul(&r, &e, 6);
        assert!(one[1..].iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn massless_black_hole_is_the_cusp() {
        let s = AdsSchwarzschildSeries::new(0.0, 9).unwrap();
        assert_eq!(s.g_x[0], 1.0);
        assert!(s.g_x[1..].iter().chain(&s.g_tau[1..]).all(|c| *c == 0.0));
    }
}
