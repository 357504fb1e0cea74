//! Periodic scalar fields on the flat torus `[0, 2π)³`.
//!
//! Values live on a uniform grid with `n` points per axis. Pointwise
//! arithmetic happens in physical space; derivatives are taken spectrally,
//! one axis at a time, so they are exact for band-limited fields.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{FgError, GridPoint, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
}

impl GridSpec {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(FgError::InvalidGrid(format!(
                "{n_points} points per axis; need a power of two >= 8"
            )));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn len(&self) -> usize {
        self.n_points.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2π / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n_points as f64
    }

    /// Highest wavenumber admitted by the band-limit guard (`n / 4`).
    pub fn band_limit(&self) -> usize {
        self.n_points / 4
    }

    pub fn index(&self, p: GridPoint) -> usize {
        let n = self.n_points;
        (p[0] * n + p[1]) * n + p[2]
    }

    pub fn point(&self, index: usize) -> GridPoint {
        let n = self.n_points;
        [index / (n * n), (index / n) % n, index % n]
    }

    pub fn coords(&self, index: usize) -> [f64; 3] {
        let p = self.point(index);
        let h = self.spacing();
        [p[0] as f64 * h, p[1] as f64 * h, p[2] as f64 * h]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self { grid, values }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FgError::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Real field `Σ a·cos(k·x) + b·sin(k·x)` plus a constant.
    pub fn from_modes(grid: GridSpec, constant: f64, modes: &[FourierMode]) -> Self {
        Self::from_fn(grid, |x| {
            constant
                + modes
                    .iter()
                    .map(|m| {
                        let phase = m.wavevector[0] as f64 * x[0]
                            + m.wavevector[1] as f64 * x[1]
                            + m.wavevector[2] as f64 * x[2];
                        m.cos * phase.cos() + m.sin * phase.sin()
                    })
                    .sum::<f64>()
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// True if every sample is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Grid point where `|f|` is largest.
    pub fn argmax_abs(&self) -> GridPoint {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = i;
            }
        }
        self.grid.point(best)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    /// `self += a ⊙ b`
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        for ((o, x), y) in self.values.iter_mut().zip(&a.values).zip(&b.values) {
            *o += x * y;
        }
    }

    /// `self += s · a ⊙ b`
    pub fn add_scaled_product(&mut self, s: f64, a: &Self, b: &Self) {
        for ((o, x), y) in self.values.iter_mut().zip(&a.values).zip(&b.values) {
            *o += s * x * y;
        }
    }

    /// Spectral derivative along `axis` (1, 2 or 3).
    pub fn derivative(&self, axis: usize) -> Self {
        assert!((1..=3).contains(&axis), "axis must be 1, 2 or 3");
        let n = self.grid.n_points;
        let (fwd, inv) = plans(n);
        let stride = match axis {
            1 => n * n,
            2 => n,
            _ => 1,
        };
        let wave: Vec<f64> = (0..n)
            .map(|k| {
                if 2 * k < n {
                    k as f64
                } else if 2 * k == n {
                    0.0
                } else {
                    k as f64 - n as f64
                }
            })
            .collect();
        let mut out = vec![0.0; self.values.len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len()];
        for start in line_starts(n, axis) {
            for (j, c) in line.iter_mut().enumerate() {
                *c = Complex64::new(self.values[start + j * stride], 0.0);
            }
            fwd.process_with_scratch(&mut line, &mut scratch);
            for (c, k) in line.iter_mut().zip(&wave) {
                *c *= Complex64::new(0.0, *k / n as f64);
            }
            inv.process_with_scratch(&mut line, &mut scratch);
            for (j, c) in line.iter().enumerate() {
                out[start + j * stride] = c.re;
            }
        }
        Self {
            grid: self.grid,
            values: out,
        }
    }

    /// Gradient `(∂₁f, ∂₂f, ∂₃f)`.
    pub fn gradient(&self) -> [Self; 3] {
        [self.derivative(1), self.derivative(2), self.derivative(3)]
    }

    /// Trigonometric interpolation onto another grid. Exact for fields whose
    /// modes fit on both grids.
    pub fn resample(&self, target: GridSpec) -> Self {
        let coeffs = self.fft3();
        let n = self.grid.n_points;
        let m = target.n_points;
        let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
        let half = n.min(m) / 2;
        let signed = |k: usize, len: usize| -> i64 {
            if 2 * k < len {
                k as i64
            } else {
                k as i64 - len as i64
            }
        };
        for i in 0..self.grid.len() {
            let p = self.grid.point(i);
            let k = [signed(p[0], n), signed(p[1], n), signed(p[2], n)];
            if k.iter().any(|&v| v.unsigned_abs() as usize >= half) {
                continue;
            }
            let q = k.map(|v| v.rem_euclid(m as i64) as usize);
            out[target.index(q)] = coeffs[i];
        }
        let values = ifft3(target, out);
        Self {
            grid: target,
            values,
        }
    }

    /// Normalized 3-D Fourier coefficients `c_k = N⁻¹ Σ f(x) e^{-ik·x}`.
    fn fft3(&self) -> Vec<Complex64> {
        let n = self.grid.n_points;
        let (fwd, _) = plans(n);
        let mut data: Vec<Complex64> = self
            .values
            .iter()
            .map(|v| Complex64::new(*v, 0.0))
            .collect();
        transform_axes(&mut data, n, &fwd);
        let norm = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= norm);
        data
    }

    /// Largest Fourier modes, one representative per `±k` pair, sorted by
    /// decreasing amplitude then by wavevector.
    pub fn fourier_modes(&self, max_modes: usize, threshold: f64) -> (f64, Vec<FourierMode>) {
        let n = self.grid.n_points;
        let coeffs = self.fft3();
        let signed = |k: usize| -> i32 {
            if 2 * k < n {
                k as i32
            } else {
                k as i32 - n as i32
            }
        };
        let constant = coeffs[0].re;
        let mut modes = Vec::new();
        for (i, c) in coeffs.iter().enumerate() {
            let p = self.grid.point(i);
            let k = [signed(p[0]), signed(p[1]), signed(p[2])];
            if k == [0, 0, 0] || !canonical_half(k) {
                continue;
            }
            let nyquist = p.iter().any(|&v| 2 * v == n);
            let (cos, sin) = if nyquist {
                (c.re, 0.0)
            } else {
                (2.0 * c.re, -2.0 * c.im)
            };
            if cos.hypot(sin) > threshold {
                modes.push(FourierMode {
                    wavevector: k,
                    cos,
                    sin,
                });
            }
        }
        modes.sort_by(|a, b| {
            let aa = a.cos.hypot(a.sin);
            let bb = b.cos.hypot(b.sin);
            bb.total_cmp(&aa).then(a.wavevector.cmp(&b.wavevector))
        });
        modes.truncate(max_modes);
        (constant, modes)
    }
}

fn canonical_half(k: [i32; 3]) -> bool {
    k[0] > 0 || (k[0] == 0 && (k[1] > 0 || (k[1] == 0 && k[2] > 0)))
}

/// One real Fourier mode `cos·cos(k·x) + sin·sin(k·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub wavevector: [i32; 3],
    #[serde(rename = "amplitude_cos")]
    pub cos: f64,
    #[serde(rename = "amplitude_sin")]
    pub sin: f64,
}

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

fn line_starts(n: usize, axis: usize) -> Vec<usize> {
    let mut starts = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            starts.push(match axis {
                1 => a * n + b,
                2 => a * n * n + b,
                _ => (a * n + b) * n,
            });
        }
    }
    starts
}

fn transform_axes(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for axis in 1..=3 {
        let stride = match axis {
            1 => n * n,
            2 => n,
            _ => 1,
        };
        for start in line_starts(n, axis) {
            for (j, c) in line.iter_mut().enumerate() {
                *c = data[start + j * stride];
            }
            plan.process_with_scratch(&mut line, &mut scratch);
            for (j, c) in line.iter().enumerate() {
                data[start + j * stride] = *c;
            }
        }
    }
}

fn ifft3(grid: GridSpec, mut data: Vec<Complex64>) -> Vec<f64> {
    let (_, inv) = plans(grid.n_points());
    transform_axes(&mut data, grid.n_points(), &inv);
    data.iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(4).is_err());
        assert!(GridSpec::new(12).is_err());
        assert!(GridSpec::new(16).is_ok());
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let f = ScalarField::constant(grid(8), 3.5);
        for axis in 1..=3 {
            assert!(f.derivative(axis).sup_norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_cosine() {
        for n in [8, 16, 32] {
            let f = ScalarField::from_fn(grid(n), |x| x[0].cos());
            let df = f.derivative(1);
            let exact = ScalarField::from_fn(grid(n), |x| -x[0].sin());
            assert!(df.sub(&exact).sup_norm() <= 1e-12);
            assert!(f.derivative(2).sup_norm() < 1e-13);
        }
    }

    #[test]
    fn mixed_partials_commute() {
        let f = ScalarField::from_fn(grid(16), |x| {
            (x[0] + 2.0 * x[1]).sin() * (x[2] - x[0]).cos() + 0.3 * (x[1] * 3.0).cos()
        });
        let a = f.derivative(1).derivative(2);
        let b = f.derivative(2).derivative(1);
        assert!(a.sub(&b).sup_norm() <= 1e-12);
    }

    #[test]
    fn modes_round_trip() {
        let g = grid(16);
        let modes = vec![
            FourierMode {
                wavevector: [1, 0, 0],
                cos: 0.5,
                sin: 0.0,
            },
            FourierMode {
                wavevector: [0, 2, -1],
                cos: 0.1,
                sin: -0.2,
            },
        ];
        let f = ScalarField::from_modes(g, 1.25, &modes);
        let (c, found) = f.fourier_modes(10, 1e-12);
        assert!((c - 1.25).abs() < 1e-13);
        assert_eq!(found.len(), 2);
        assert_eq!(found[0].wavevector, [1, 0, 0]);
        assert!((found[0].cos - 0.5).abs() < 1e-13);
        assert_eq!(found[1].wavevector, [0, 2, -1]);
        assert!((found[1].cos - 0.1).abs() < 1e-13 && (found[1].sin + 0.2).abs() < 1e-13);
    }

    #[test]
    fn resample_is_exact_for_band_limited() {
        let f16 = ScalarField::from_fn(grid(16), |x| (x[0] + x[2]).sin() + 0.2 * (2.0 * x[1]).cos());
        let f32 = ScalarField::from_fn(grid(32), |x| (x[0] + x[2]).sin() + 0.2 * (2.0 * x[1]).cos());
        assert!(f16.resample(grid(32)).sub(&f32).sup_norm() < 1e-13);
        assert!(f32.resample(grid(16)).sub(&f16).sup_norm() < 1e-13);
    }
}
