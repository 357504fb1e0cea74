//! Symmetric bilinear forms on T³ with field-valued components.

use nalgebra::Matrix3;

use crate::error::{FgError, Result};
use crate::field::{GridSpec, ScalarField};
use crate::series::Coefficient;

/// Component labels in storage order.
pub const SYM3_LABELS: [&str; 6] = ["11", "12", "13", "22", "23", "33"];

/// Storage slot of the unordered index pair `(i, j)` of a symmetric
/// `dim × dim` array (upper triangle, row-major, 0-based).
pub fn sym_index(i: usize, j: usize, dim: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * (2 * dim - a + 1) / 2 + (b - a)
}

/// Inverse of [`sym_index`].
pub fn sym_pair(slot: usize, dim: usize) -> (usize, usize) {
    for i in 0..dim {
        for j in i..dim {
            if sym_index(i, j, dim) == slot {
                return (i, j);
            }
        }
    }
    panic!("slot {slot} out of range for dimension {dim}");
}

/// Number of independent components of a symmetric `dim × dim` array.
pub fn sym_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Parse a component label such as `"23"` into 0-based indices.
pub fn parse_component(label: &str) -> Option<(usize, usize)> {
    let b = label.as_bytes();
    if b.len() != 2 {
        return None;
    }
    let i = (b[0] as char).to_digit(10)? as usize;
    let j = (b[1] as char).to_digit(10)? as usize;
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
        return None;
    }
    Some((i - 1, j - 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymForm {
    comps: Vec<ScalarField>,
}

impl SymForm {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            comps: vec![ScalarField::zeros(grid); 6],
        }
    }

    /// `c·δ`.
    pub fn scaled_identity(grid: GridSpec, c: f64) -> Self {
        Self::from_fn(grid, |i, j| {
            ScalarField::constant(grid, if i == j { c } else { 0.0 })
        })
    }

    pub fn identity(grid: GridSpec) -> Self {
        Self::scaled_identity(grid, 1.0)
    }

    /// Constant form with the given upper-triangle entries.
    pub fn constant(grid: GridSpec, m: [[f64; 3]; 3]) -> Self {
        Self::from_fn(grid, |i, j| ScalarField::constant(grid, m[i][j]))
    }

    pub fn diag(grid: GridSpec, d: [f64; 3]) -> Self {
        Self::constant(grid, [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    /// Build from a component generator called once per `i ≤ j`.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize, usize) -> ScalarField) -> Self {
        let comps = (0..6)
            .map(|s| {
                let (i, j) = sym_pair(s, 3);
                let c = f(i, j);
                assert_eq!(c.grid(), grid, "component grid differs from form grid");
                c
            })
            .collect();
        Self { comps }
    }

    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        if comps.len() != 6 {
            return Err(FgError::InvalidParameter(format!(
                "a symmetric form needs 6 components, got {}",
                comps.len()
            )));
        }
        let n = comps[0].grid().n_points();
        if let Some(bad) = comps.iter().find(|c| c.grid().n_points() != n) {
            return Err(FgError::GridMismatch {
                left: n,
                right: bad.grid().n_points(),
            });
        }
        Ok(Self { comps })
    }

    pub fn grid(&self) -> GridSpec {
        self.comps[0].grid()
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[sym_index(i, j, 3)]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut ScalarField {
        &mut self.comps[sym_index(i, j, 3)]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn mul_field(&self, f: &ScalarField) -> Self {
        self.map(|c| c.mul(f))
    }

    pub fn resample(&self, target: GridSpec) -> Self {
        self.map(|c| c.resample(target))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Pointwise `3×3` matrix at flat index `p`.
    pub fn matrix_at(&self, p: usize) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.get(i, j).values()[p])
    }

    /// Pointwise smallest eigenvalue and the grid point where it is attained.
    pub fn min_eigenvalue(&self) -> (f64, usize) {
        let mut worst = (f64::INFINITY, 0);
        for p in 0..self.grid().len() {
            let e = self.matrix_at(p).symmetric_eigenvalues().min();
            if e < worst.0 {
                worst = (e, p);
            }
        }
        worst
    }

    pub fn check_positive_definite(&self) -> Result<()> {
        let (e, p) = self.min_eigenvalue();
        if e > 0.0 && e.is_finite() {
            Ok(())
        } else {
            Err(FgError::NotPositiveDefinite {
                point: self.grid().point(p),
                eigenvalue: e,
            })
        }
    }

    /// Pointwise matrix inverse.
    pub fn inverse(&self) -> Result<Self> {
        let grid = self.grid();
        let mut out = vec![vec![0.0; grid.len()]; 6];
        for p in 0..grid.len() {
            let m = self.matrix_at(p);
            let inv = m.try_inverse().ok_or(FgError::SingularLeading {
                point: grid.point(p),
                condition: f64::INFINITY,
            })?;
            for (s, slot) in out.iter_mut().enumerate() {
                let (i, j) = sym_pair(s, 3);
                slot[p] = inv[(i, j)];
            }
        }
        Ok(Self {
            comps: out
                .into_iter()
                .map(|v| ScalarField::from_values(grid, v).expect("grid size"))
                .collect(),
        })
    }

    /// `g^{ij} h_{ij}` for the inverse metric `ginv`.
    pub fn contract(&self, ginv: &SymForm) -> ScalarField {
        let mut acc = ScalarField::zeros(self.grid());
        for i in 0..3 {
            for j in 0..3 {
                acc.add_product(ginv.get(i, j), self.get(i, j));
            }
        }
        acc
    }

    /// Flatten to a 6-vector at grid index `p` (storage order).
    pub fn vector_at(&self, p: usize) -> [f64; 6] {
        std::array::from_fn(|s| self.comps[s].values()[p])
    }

    /// Inverse of [`SymForm::vector_at`] applied at every grid point.
    pub fn from_vectors(grid: GridSpec, v: &[[f64; 6]]) -> Self {
        Self {
            comps: (0..6)
                .map(|s| {
                    ScalarField::from_values(grid, v.iter().map(|x| x[s]).collect())
                        .expect("grid size")
                })
                .collect(),
        }
    }
}

impl Coefficient for SymForm {
    fn zero_like(&self) -> Self {
        SymForm::zeros(self.grid())
    }
    fn add(&self, other: &Self) -> Self {
        Self {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }
    fn sub(&self, other: &Self) -> Self {
        Self {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
    fn scale(&self, s: f64) -> Self {
        self.map(|c| c.scale(s))
    }
    fn sup_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.sup_norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_round_trip() {
        for dim in [3, 4] {
            let mut seen = vec![false; sym_len(dim)];
            for i in 0..dim {
                for j in 0..dim {
                    let s = sym_index(i, j, dim);
                    assert_eq!(s, sym_index(j, i, dim));
                    seen[s] = true;
                    if i <= j {
                        assert_eq!(sym_pair(s, dim), (i, j));
                    }
                }
            }
            assert!(seen.into_iter().all(|x| x));
        }
        assert_eq!(sym_index(1, 2, 3), 4);
        assert_eq!(SYM3_LABELS[sym_index(1, 2, 3)], "23");
    }

    #[test]
    fn labels_parse() {
        assert_eq!(parse_component("13"), Some((0, 2)));
        assert_eq!(parse_component("40"), None);
        assert_eq!(parse_component("1"), None);
    }

    #[test]
    fn indefinite_form_is_rejected() {
        let g = GridSpec::new(8).unwrap();
        assert!(SymForm::identity(g).check_positive_definite().is_ok());
        let err = SymForm::diag(g, [1.0, -0.5, 1.0]).check_positive_definite();
        assert!(matches!(err, Err(FgError::NotPositiveDefinite { eigenvalue, .. }) if (eigenvalue + 0.5).abs() < 1e-12));
    }
}
