//! Truncated power series in the defining function `t`, and Laurent series
//! with a pole of order at most two.
//!
//! Coefficients are generic ([`Coefficient`]); products are only defined for
//! scalar-field coefficients, where they are pointwise Cauchy products.
//!
//! Two flavours of binary operation exist. The strict ones (`add`, `mul`, ...)
//! reject operands of different truncation order. The `*_trunc` ones used by
//! the curvature engine truncate to the smaller order, which is how every
//! `t`-derivative (one order lost) propagates through a formula.

use rayon::prelude::*;

use crate::error::{FgError, Result};
use crate::field::{GridSpec, ScalarField};

/// Values that can sit in a series slot.
pub trait Coefficient: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    fn sup_norm(&self) -> f64;
}

impl Coefficient for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn sup_norm(&self) -> f64 {
        self.abs()
    }
}

impl Coefficient for ScalarField {
    fn zero_like(&self) -> Self {
        ScalarField::zeros(self.grid())
    }
    fn add(&self, other: &Self) -> Self {
        ScalarField::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        ScalarField::sub(self, other)
    }
    fn scale(&self, s: f64) -> Self {
        ScalarField::scale(self, s)
    }
    fn sup_norm(&self) -> f64 {
        ScalarField::sup_norm(self)
    }
}

/// `Σ_{k=0}^{K} c_k t^k`, truncated at order `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TSeries<V> {
    coeffs: Vec<V>,
}

/// Series with scalar-field coefficients; the workhorse of the engine.
pub type Series = TSeries<ScalarField>;

impl<V: Coefficient> TSeries<V> {
    pub fn new(coeffs: Vec<V>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &V {
        &self.coeffs[k]
    }

    pub fn coeff_mut(&mut self, k: usize) -> &mut V {
        &mut self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[V] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<V> {
        self.coeffs
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.zero_like()).collect(),
        }
    }

    /// Drop coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot raise order by truncation");
        Self {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    /// Extend with zero coefficients up to `order`.
    pub fn pad(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        let zero = coeffs[0].zero_like();
        coeffs.resize(order.max(self.order()) + 1, zero);
        Self { coeffs }
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(FgError::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.add_trunc(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.sub_trunc(other))
    }

    pub fn add_trunc(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub_trunc(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// Exact `d/dt`; the result has order `K - 1`.
    pub fn dt(&self) -> Self {
        assert!(self.order() >= 1, "d/dt of an order-0 series is undefined");
        Self {
            coeffs: self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c.scale((k + 1) as f64))
                .collect(),
        }
    }

    /// Multiply by `t^j`, keeping the truncation order.
    pub fn shift_up(&self, j: usize) -> Self {
        let zero = self.coeffs[0].zero_like();
        let coeffs = (0..=self.order())
            .map(|k| {
                if k < j {
                    zero.clone()
                } else {
                    self.coeffs[k - j].clone()
                }
            })
            .collect();
        Self { coeffs }
    }

    /// Horner evaluation at `t`.
    pub fn evaluate(&self, t: f64) -> V {
        let mut acc = self.coeffs[self.order()].clone();
        for c in self.coeffs[..self.order()].iter().rev() {
            acc = acc.scale(t).add(c);
        }
        acc
    }

    /// Largest coefficient sup norm.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.sup_norm()).fold(0.0, f64::max)
    }

    /// Per-order sup norms.
    pub fn order_norms(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.sup_norm()).collect()
    }
}

impl Series {
    pub fn constant(grid: GridSpec, order: usize, value: f64) -> Self {
        let mut coeffs = vec![ScalarField::zeros(grid); order + 1];
        coeffs[0] = ScalarField::constant(grid, value);
        Self { coeffs }
    }

    pub fn zeros(grid: GridSpec, order: usize) -> Self {
        Self {
            coeffs: vec![ScalarField::zeros(grid); order + 1],
        }
    }

    /// The series `t^j` (zero if `j > order`).
    pub fn t_power(grid: GridSpec, order: usize, j: usize) -> Self {
        let mut s = Self::zeros(grid, order);
        if j <= order {
            s.coeffs[j] = ScalarField::constant(grid, 1.0);
        }
        s
    }

    /// Series with a single field at order 0.
    pub fn from_field(field: ScalarField, order: usize) -> Self {
        let grid = field.grid();
        let mut s = Self::zeros(grid, order);
        s.coeffs[0] = field;
        s
    }

    pub fn grid(&self) -> GridSpec {
        self.coeffs[0].grid()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.mul_trunc(other))
    }

    /// Cauchy product truncated at the smaller of the two orders.
    pub fn mul_trunc(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let za: Vec<bool> = self.coeffs[..=order].iter().map(|c| c.is_zero()).collect();
        let zb: Vec<bool> = other.coeffs[..=order].iter().map(|c| c.is_zero()).collect();
        let grid = self.grid();
        let coeffs = (0..=order)
            .into_par_iter()
            .map(|k| {
                let mut out = ScalarField::zeros(grid);
                for i in 0..=k {
                    if !za[i] && !zb[k - i] {
                        out.add_product(&self.coeffs[i], &other.coeffs[k - i]);
                    }
                }
                out
            })
            .collect();
        Self { coeffs }
    }

    /// Multiply every coefficient by a fixed field.
    pub fn mul_field(&self, f: &ScalarField) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| if c.is_zero() { c.clone() } else { c.mul(f) })
                .collect(),
        }
    }

    /// Spectral `∂/∂x^axis` of every coefficient.
    pub fn dx(&self, axis: usize) -> Self {
        Self {
            coeffs: self
                .coeffs
                .par_iter()
                .map(|c| if c.is_zero() { c.clone() } else { c.derivative(axis) })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Accumulate `self += a·b` (truncated to `self`'s order).
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        let order = self.order().min(a.order()).min(b.order());
        let za: Vec<bool> = a.coeffs[..=order].iter().map(|c| c.is_zero()).collect();
        let zb: Vec<bool> = b.coeffs[..=order].iter().map(|c| c.is_zero()).collect();
        self.coeffs.truncate(order + 1);
        self.coeffs.par_iter_mut().enumerate().for_each(|(k, out)| {
            for i in 0..=k {
                if !za[i] && !zb[k - i] {
                    out.add_product(&a.coeffs[i], &b.coeffs[k - i]);
                }
            }
        });
    }

    /// `self += s·other`, truncated to the smaller order.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        let order = self.order().min(other.order());
        self.coeffs.truncate(order + 1);
        for (o, c) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !c.is_zero() {
                o.axpy(s, c);
            }
        }
    }

    /// `self += s·a·b`, truncated to the smallest order involved.
    pub fn add_scaled_product(&mut self, s: f64, a: &Self, b: &Self) {
        let order = self.order().min(a.order()).min(b.order());
        let za: Vec<bool> = a.coeffs[..=order].iter().map(|c| c.is_zero()).collect();
        let zb: Vec<bool> = b.coeffs[..=order].iter().map(|c| c.is_zero()).collect();
        self.coeffs.truncate(order + 1);
        self.coeffs.par_iter_mut().enumerate().for_each(|(k, out)| {
            for i in 0..=k {
                if !za[i] && !zb[k - i] {
                    out.add_scaled_product(s, &a.coeffs[i], &b.coeffs[k - i]);
                }
            }
        });
    }

    /// `1/self` for a series whose leading coefficient is nowhere zero.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = &self.coeffs[0];
        let worst = a0
            .values()
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let smallest = a0.values()[worst].abs();
        let largest = a0.sup_norm();
        if smallest == 0.0 || largest / smallest > 1e6 {
            return Err(FgError::SingularLeading {
                point: a0.grid().point(worst),
                condition: if smallest == 0.0 {
                    f64::INFINITY
                } else {
                    largest / smallest
                },
            });
        }
        let inv0 = a0.map(|v| 1.0 / v);
        let mut coeffs = vec![inv0.clone()];
        for k in 1..=self.order() {
            let mut acc = ScalarField::zeros(a0.grid());
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc.add_product(&self.coeffs[j], &coeffs[k - j]);
                }
            }
            coeffs.push(acc.mul(&inv0).scale(-1.0));
        }
        Ok(Self { coeffs })
    }
}

/// Strict series product; errors on differing truncation orders.
pub fn series_mul(a: &Series, b: &Series) -> Result<Series> {
    a.mul(b)
}

pub fn series_add<V: Coefficient>(a: &TSeries<V>, b: &TSeries<V>) -> Result<TSeries<V>> {
    a.add(b)
}

pub fn series_scale<V: Coefficient>(a: &TSeries<V>, s: f64) -> TSeries<V> {
    a.scale(s)
}

/// Square matrix of series, row-major.
pub type MatrixSeries = Vec<Vec<Series>>;

/// Order-by-order inverse of a matrix series:
/// `X₀ = A₀⁻¹`, `X_k = −X₀ Σ_{j=1..k} A_j X_{k−j}`.
pub fn matrix_series_inverse(a: &MatrixSeries) -> Result<MatrixSeries> {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n), "matrix must be square");
    let order = a
        .iter()
        .flat_map(|row| row.iter().map(|s| s.order()))
        .min()
        .expect("empty matrix");
    let grid = a[0][0].grid();
    let x0 = pointwise_inverse(n, grid, |i, j| a[i][j].coeff(0))?;

    let mut x: Vec<Vec<Vec<ScalarField>>> = vec![x0.clone()];
    for k in 1..=order {
        // S = Σ_{j=1..k} A_j X_{k−j}
        let mut s = vec![vec![ScalarField::zeros(grid); n]; n];
        for j in 1..=k {
            for r in 0..n {
                for m in 0..n {
                    let aj = a[r][m].coeff(j);
                    if aj.is_zero() {
                        continue;
                    }
                    for c in 0..n {
                        let xm = &x[k - j][m][c];
                        if !xm.is_zero() {
                            s[r][c].add_product(aj, xm);
                        }
                    }
                }
            }
        }
        let mut xk = vec![vec![ScalarField::zeros(grid); n]; n];
        for r in 0..n {
            for m in 0..n {
                for c in 0..n {
                    if !s[m][c].is_zero() {
                        xk[r][c].add_product(&x0[r][m], &s[m][c]);
                    }
                }
            }
        }
        for row in xk.iter_mut() {
            for f in row.iter_mut() {
                *f = f.scale(-1.0);
            }
        }
        x.push(xk);
    }
    Ok((0..n)
        .map(|r| {
            (0..n)
                .map(|c| Series::new((0..=order).map(|k| x[k][r][c].clone()).collect()))
                .collect()
        })
        .collect())
}

/// Pointwise inverse of an `n×n` field matrix, rejecting condition numbers
/// above 1e6.
pub(crate) fn pointwise_inverse<'a>(
    n: usize,
    grid: GridSpec,
    entry: impl Fn(usize, usize) -> &'a ScalarField,
) -> Result<Vec<Vec<ScalarField>>> {
    let mut out = vec![vec![vec![0.0; grid.len()]; n]; n];
    let mut worst = (0usize, 0.0_f64);
    for p in 0..grid.len() {
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| entry(i, j).values()[p]);
        let sv = m.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if cond > worst.1 {
            worst = (p, cond);
        }
        if cond > 1e6 {
            return Err(FgError::SingularLeading {
                point: grid.point(p),
                condition: cond,
            });
        }
        let inv = m.try_inverse().ok_or(FgError::SingularLeading {
            point: grid.point(p),
            condition: cond,
        })?;
        for i in 0..n {
            for j in 0..n {
                out[i][j][p] = inv[(i, j)];
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| ScalarField::from_values(grid, v).expect("grid size"))
                .collect()
        })
        .collect())
}

/// `Σ_{k=m}^{M} c_k t^k` with `m ≥ −2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries<V> {
    min_order: i32,
    coeffs: Vec<V>,
}

pub const LAURENT_FLOOR: i32 = -2;

impl<V: Coefficient> LaurentSeries<V> {
    pub fn new(min_order: i32, coeffs: Vec<V>) -> Result<Self> {
        if min_order < LAURENT_FLOOR {
            return Err(FgError::InvalidParameter(format!(
                "Laurent series floor {min_order} is below t^-2"
            )));
        }
        assert!(!coeffs.is_empty());
        Ok(Self { min_order, coeffs })
    }

    /// `t^shift · s`.
    pub fn from_series(s: &TSeries<V>, shift: i32) -> Result<Self> {
        Self::new(shift, s.coeffs().to_vec())
    }

    pub fn min_order(&self) -> i32 {
        self.min_order
    }

    pub fn max_order(&self) -> i32 {
        self.min_order + self.coeffs.len() as i32 - 1
    }

    pub fn coeff(&self, order: i32) -> Option<&V> {
        if order < self.min_order || order > self.max_order() {
            None
        } else {
            Some(&self.coeffs[(order - self.min_order) as usize])
        }
    }

    /// Sum over the common range: floor is the lower floor, top the lower top.
    pub fn add(&self, other: &Self) -> Self {
        let lo = self.min_order.min(other.min_order);
        let hi = self.max_order().min(other.max_order());
        let zero = self.coeffs[0].zero_like();
        let coeffs = (lo..=hi)
            .map(|k| match (self.coeff(k), other.coeff(k)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => zero.clone(),
            })
            .collect();
        Self {
            min_order: lo,
            coeffs,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            min_order: self.min_order,
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// Non-negative part, provided every negative-order coefficient has sup
    /// norm at most `tol`.
    pub fn assert_regular(&self, tol: f64) -> Result<TSeries<V>> {
        for k in self.min_order..0 {
            if let Some(c) = self.coeff(k) {
                let norm = c.sup_norm();
                if norm > tol || !norm.is_finite() {
                    return Err(FgError::CancellationFailure { order: k, norm });
                }
            }
        }
        if self.max_order() < 0 {
            return Err(FgError::InvalidParameter(
                "Laurent series has no regular part".into(),
            ));
        }
        let zero = self.coeffs[0].zero_like();
        let coeffs = (0..=self.max_order())
            .map(|k| self.coeff(k).cloned().unwrap_or_else(|| zero.clone()))
            .collect();
        Ok(TSeries::new(coeffs))
    }
}

pub fn laurent_assert_regular<V: Coefficient>(
    x: &LaurentSeries<V>,
    tol: f64,
) -> Result<TSeries<V>> {
    x.assert_regular(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> GridSpec {
        GridSpec::new(8).unwrap()
    }

    fn poly(c: &[f64]) -> Series {
        Series::new(c.iter().map(|v| ScalarField::constant(g(), *v)).collect())
    }

    #[test]
    fn unit_times_unit() {
        let one = poly(&[1.0, 0.0, 0.0]);
        assert_eq!(one.mul(&one).unwrap(), one);
    }

    #[test]
    fn difference_of_squares() {
        let a = poly(&[1.0, 1.0, 0.0, 0.0]);
        let b = poly(&[1.0, -1.0, 0.0, 0.0]);
        assert_eq!(a.mul(&b).unwrap(), poly(&[1.0, 0.0, -1.0, 0.0]));
    }

    #[test]
    fn order_mismatch_is_an_error() {
        let a = poly(&[1.0, 1.0]);
        let b = poly(&[1.0, 1.0, 1.0]);
        assert!(matches!(
            a.mul(&b),
            Err(FgError::OrderMismatch { left: 1, right: 2 })
        ));
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let s = poly(&[1.0, 0.0, 1.0]);
        assert_eq!(s.evaluate(0.0).values()[0], 1.0);
        let k = 12;
        let geo = TSeries::new(vec![1.0_f64; k + 1]);
        let exact = (1.0 - 0.5_f64.powi(k as i32 + 1)) / 0.5;
        assert!((geo.evaluate(0.5) - exact).abs() < 1e-14);
        assert_eq!(Series::zeros(g(), 3).sup_norm(), 0.0);
    }

    #[test]
    fn scalar_reciprocal_is_geometric() {
        let s = poly(&[1.0, -1.0, 0.0, 0.0, 0.0]);
        let r = s.reciprocal().unwrap();
        for k in 0..=4 {
            assert!((r.coeff(k).values()[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn laurent_gate() {
        let reg = poly(&[1.0, 2.0]);
        let l = LaurentSeries::from_series(&reg, 0).unwrap();
        assert_eq!(l.assert_regular(1e-12).unwrap(), reg);

        let tiny = ScalarField::constant(g(), 1e-15);
        let mixed = LaurentSeries::new(
            -1,
            vec![tiny, ScalarField::constant(g(), 1.0), ScalarField::constant(g(), 2.0)],
        )
        .unwrap();
        assert_eq!(mixed.assert_regular(1e-12).unwrap(), reg);

        let bad = LaurentSeries::new(-2, vec![ScalarField::constant(g(), 0.1); 3]).unwrap();
        assert!(matches!(
            bad.assert_regular(1e-12),
            Err(FgError::CancellationFailure { order: -2, .. })
        ));
        assert!(LaurentSeries::new(-3, vec![0.0]).is_err());
    }

    #[test]
    fn laurent_add_aligns_floors() {
        let a = LaurentSeries::new(-2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = LaurentSeries::new(0, vec![10.0, 20.0]).unwrap();
        let c = a.add(&b);
        assert_eq!(c.min_order(), -2);
        assert_eq!(c.max_order(), 1);
        assert_eq!(c.coeff(0), Some(&13.0));
        assert_eq!(c.coeff(1), Some(&24.0));
    }
}
