#![allow(dead_code)]

use fgforge::field::FourierMode;
use fgforge::series::Coefficient;
use fgforge::{GridSpec, ScalarField, Series, SymForm, TSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grid(n: usize) -> GridSpec {
    GridSpec::new(n).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Fourier modes with wavevector components in `-kmax..=kmax`.
pub fn random_modes(rng: &mut ChaCha8Rng, count: usize, kmax: i32, amp: f64) -> Vec<FourierMode> {
    (0..count)
        .map(|_| FourierMode {
            wavevector: [
                rng.random_range(-kmax..=kmax),
                rng.random_range(-kmax..=kmax),
                rng.random_range(-kmax..=kmax),
            ],
            cos: amp * rng.random_range(-1.0..1.0),
            sin: amp * rng.random_range(-1.0..1.0),
        })
        .collect()
}

pub fn random_field(g: GridSpec, rng: &mut ChaCha8Rng, constant: f64, amp: f64) -> ScalarField {
    let modes = random_modes(rng, 3, 1, amp);
    ScalarField::from_modes(g, constant, &modes)
}

/// `c·δ + (band-limited perturbation of size amp)`.
pub fn random_form(g: GridSpec, rng: &mut ChaCha8Rng, c: f64, amp: f64) -> SymForm {
    SymForm::from_fn(g, |i, j| random_field(g, rng, if i == j { c } else { 0.0 }, amp))
}

/// Tangential series `δ + perturbations` with small random higher coefficients.
pub fn random_tangential(g: GridSpec, rng: &mut ChaCha8Rng, order: usize, amp: f64) -> TSeries<SymForm> {
    TSeries::new(
        (0..=order)
            .map(|k| {
                if k == 0 {
                    random_form(g, rng, 1.0, amp)
                } else {
                    random_form(g, rng, 0.0, amp)
                }
            })
            .collect(),
    )
}

pub fn random_series(g: GridSpec, rng: &mut ChaCha8Rng, order: usize, amp: f64) -> Series {
    Series::new((0..=order).map(|_| random_field(g, rng, 0.0, amp)).collect())
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, b| a.max(b.abs()))
}

/// `δ + p` with `p` a band-limited symmetric perturbation of sup norm `amp`
/// (measured on a 32³ grid, so the field does not depend on `g`).
pub fn band_limited_gamma(g: GridSpec, rng: &mut ChaCha8Rng, amp: f64) -> SymForm {
    let reference = random_form(grid(32), &mut rng.clone(), 0.0, 1.0);
    let p = random_form(g, rng, 0.0, 1.0);
    let scale = amp / reference.sup_norm();
    SymForm::identity(g).add(&p.scale(scale))
}
