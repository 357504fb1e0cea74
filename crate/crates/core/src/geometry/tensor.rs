//! Series-valued tensors over a coordinate chart.
//!
//! The same code serves the 4-dimensional bulk, where axis 0 is the defining
//! function `t` (differentiated by shifting series coefficients) and axes
//! 1..3 are the torus coordinates, and the 3-dimensional boundary, where
//! every axis is a torus coordinate and series have order 0.

use crate::error::Result;
use crate::field::{GridSpec, ScalarField};
use crate::series::{matrix_series_inverse, Series};
use crate::symform::{sym_index, sym_len, sym_pair, SymForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Coordinates `(t, x¹, x², x³)`.
    Bulk,
    /// Coordinates `(x¹, x², x³)`.
    Boundary,
}

impl Chart {
    pub fn dim(self) -> usize {
        match self {
            Chart::Bulk => 4,
            Chart::Boundary => 3,
        }
    }

    /// Coordinate derivative `∂_a`.
    pub fn partial(self, s: &Series, a: usize) -> Series {
        match self {
            Chart::Bulk if a == 0 => s.dt(),
            Chart::Bulk => s.dx(a),
            Chart::Boundary => s.dx(a + 1),
        }
    }

    /// Chart index of torus axis `i` (0-based).
    pub fn spatial(self, i: usize) -> usize {
        match self {
            Chart::Bulk => i + 1,
            Chart::Boundary => i,
        }
    }

    pub fn for_dim(dim: usize) -> Self {
        match dim {
            4 => Chart::Bulk,
            3 => Chart::Boundary,
            _ => panic!("no chart of dimension {dim}"),
        }
    }
}

/// Symmetric rank-2 tensor with series components.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    dim: usize,
    comps: Vec<Series>,
}

impl SymTensor {
    pub fn zeros(dim: usize, grid: GridSpec, order: usize) -> Self {
        Self {
            dim,
            comps: vec![Series::zeros(grid, order); sym_len(dim)],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Series) -> Self {
        Self {
            dim,
            comps: (0..sym_len(dim))
                .map(|s| {
                    let (a, b) = sym_pair(s, dim);
                    f(a, b)
                })
                .collect(),
        }
    }

    pub fn from_components(dim: usize, comps: Vec<Series>) -> Self {
        assert_eq!(comps.len(), sym_len(dim));
        Self { dim, comps }
    }

    /// Constant-coefficient bulk tensor `t`-independent in every slot.
    pub fn from_matrix(dim: usize, grid: GridSpec, order: usize, m: &[[f64; 4]; 4]) -> Self {
        Self::from_fn(dim, |a, b| Series::constant(grid, order, m[a][b]))
    }

    /// Boundary tensor (order-0 series) from a [`SymForm`].
    pub fn from_symform(h: &SymForm) -> Self {
        Self::from_fn(3, |i, j| Series::new(vec![h.get(i, j).clone()]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> &Series {
        &self.comps[sym_index(a, b, self.dim)]
    }

    pub fn get_mut(&mut self, a: usize, b: usize) -> &mut Series {
        &mut self.comps[sym_index(a, b, self.dim)]
    }

    pub fn components(&self) -> &[Series] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<Series> {
        self.comps
    }

    pub fn grid(&self) -> GridSpec {
        self.comps[0].grid()
    }

    /// Smallest component order.
    pub fn order(&self) -> usize {
        self.comps.iter().map(|c| c.order()).min().unwrap_or(0)
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|c| c.truncate(order))
    }

    pub fn pad(&self, order: usize) -> Self {
        self.map(|c| c.pad(order))
    }

    pub fn map(&self, f: impl Fn(&Series) -> Series) -> Self {
        Self {
            dim: self.dim,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(&Series, &Series) -> Series) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add_trunc(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub_trunc(b))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c.scale(s))
    }

    /// Multiply every component by a scalar series.
    pub fn mul_series(&self, f: &Series) -> Self {
        self.map(|c| c.mul_trunc(f))
    }

    /// Largest sup norm over components, per series order.
    pub fn order_norms(&self) -> Vec<f64> {
        let order = self.order();
        (0..=order)
            .map(|k| {
                self.comps
                    .iter()
                    .map(|c| c.coeff(k).sup_norm())
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.order_norms().into_iter().fold(0.0, f64::max)
    }

    /// Components of the order-`k` coefficient as a pointwise field array.
    pub fn coefficient(&self, k: usize) -> Vec<ScalarField> {
        self.comps.iter().map(|c| c.coeff(k).clone()).collect()
    }

    /// Tangential block `(i, j)`, `i, j ∈ 1..3`, of a bulk tensor as a
    /// [`SymForm`] for coefficient `k`.
    pub fn tangential_coefficient(&self, k: usize) -> SymForm {
        assert_eq!(self.dim, 4);
        SymForm::from_fn(self.grid(), |i, j| self.get(i + 1, j + 1).coeff(k).clone())
    }

    /// Full trace against an inverse metric: `g^{ab} h_{ab}`.
    pub fn trace_with(&self, ginv: &SymTensor) -> Series {
        let order = self.order().min(ginv.order());
        let mut acc = Series::zeros(self.grid(), order);
        for a in 0..self.dim {
            for b in 0..self.dim {
                acc.add_product(ginv.get(a, b), self.get(a, b));
            }
        }
        acc
    }

    /// `h^{ab} = g^{ac} g^{bd} h_{cd}`.
    pub fn raise_both(&self, ginv: &SymTensor) -> SymTensor {
        let d = self.dim;
        let order = self.order().min(ginv.order());
        let grid = self.grid();
        // mixed[a][d] = g^{ac} h_{cd}
        let mixed: Vec<Vec<Series>> = (0..d)
            .map(|a| {
                (0..d)
                    .map(|e| {
                        let mut acc = Series::zeros(grid, order);
                        for c in 0..d {
                            acc.add_product(ginv.get(a, c), self.get(c, e));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        SymTensor::from_fn(d, |a, b| {
            let mut acc = Series::zeros(grid, order);
            for e in 0..d {
                acc.add_product(&mixed[a][e], ginv.get(e, b));
            }
            acc
        })
    }
}

/// Series inverse of a symmetric tensor, symmetrized after inversion.
pub fn inverse_metric(g: &SymTensor) -> Result<SymTensor> {
    let d = g.dim();
    let m: Vec<Vec<Series>> = (0..d)
        .map(|a| (0..d).map(|b| g.get(a, b).clone()).collect())
        .collect();
    let inv = matrix_series_inverse(&m)?;
    Ok(SymTensor::from_fn(d, |a, b| {
        if a == b {
            inv[a][a].clone()
        } else {
            inv[a][b].add_trunc(&inv[b][a]).scale(0.5)
        }
    }))
}

/// Covector with series components.
pub type Covector = Vec<Series>;

/// Largest sup norm over a list of series, per order.
pub fn covector_order_norms(w: &[Series]) -> Vec<f64> {
    let order = w.iter().map(|c| c.order()).min().unwrap_or(0);
    (0..=order)
        .map(|k| w.iter().map(|c| c.coeff(k).sup_norm()).fold(0.0, f64::max))
        .collect()
}
