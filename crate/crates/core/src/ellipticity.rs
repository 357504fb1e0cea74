//! Principal boundary symbol of the gauged Einstein boundary problem and
//! the complementing (Lopatinski–Shapiro) condition.
//!
//! Unknowns are ordered as the six tangential components `h_ij` (11, 12, 13,
//! 22, 23, 33) followed by `h_00, h_01, h_02, h_03`. The twenty boundary rows
//! come in four blocks of orders 0, 1, 2 and 3 in `z`:
//!
//! ```text
//! rows  0.. 6   I₆                         | 0
//! rows  6..10   0                          | [[z, 2ξᵀ], [½ξ, z I₃]]
//! rows 10..16   (z² + |ξ|²) I₆             | 0
//! rows 16..20   0                          | diag z(z² + |ξ|²), first row −⅓|ξ|²ξⱼ
//! ```
//!
//! A non-euclidean metric at the boundary point is handled by rewriting the
//! covector `ξ + z·n` in a `g`-orthonormal coframe, so every symbol entry
//! stays a polynomial in `z`.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FgError, Result};

pub const N_ROWS: usize = 20;
pub const N_UNKNOWNS: usize = 10;
/// Row degree of each block.
pub const BLOCK_DEGREES: [usize; 4] = [0, 1, 2, 3];
const BLOCK_STARTS: [usize; 5] = [0, 6, 10, 16, 20];

/// Polynomial in `z` with complex coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        Poly(vec![Complex64::new(c, 0.0)]).trimmed()
    }

    /// `a + b z`.
    pub fn linear(a: f64, b: f64) -> Self {
        Poly(vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)]).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.norm() == 0.0) {
            self.0.pop();
        }
        self
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| c.norm() > COEFF_ZERO)
    }

    pub fn coefficient(&self, k: usize) -> Complex64 {
        self.0.get(k).copied().unwrap_or_default()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly((0..n).map(|k| self.coefficient(k) + other.coefficient(k)).collect()).trimmed()
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect()).trimmed()
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::default(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trimmed()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::default(), |acc, c| acc * z + c)
    }

    /// All roots by Durand–Kerner iteration. Multiple roots converge only
    /// to about the square root of machine precision.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree().unwrap_or(0);
        if n == 0 {
            return Vec::new();
        }
        let lead = self.coefficient(n);
        let monic = Poly(self.0[..=n].iter().map(|c| c / lead).collect());
        let seed = Complex64::new(0.4, 0.9);
        let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
        for _ in 0..2000 {
            let mut shift = 0.0_f64;
            for i in 0..n {
                let denom = (0..n)
                    .filter(|&j| j != i)
                    .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z[i] - z[j]));
                let step = monic.eval(z[i]) / denom;
                z[i] -= step;
                shift = shift.max(step.norm());
            }
            if shift < 1e-15 {
                break;
            }
        }
        z
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }
}

const COEFF_ZERO: f64 = 1e-14;

/// Tangential covector `ξ` and the metric at the boundary point (index 0 is
/// the normal direction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CotangentDatum {
    pub xi: [f64; 3],
    pub metric: [[f64; 4]; 4],
}

impl CotangentDatum {
    pub fn euclidean(xi: [f64; 3]) -> Result<Self> {
        let mut metric = [[0.0; 4]; 4];
        for (a, row) in metric.iter_mut().enumerate() {
            row[a] = 1.0;
        }
        Self::new(xi, metric)
    }

    pub fn new(xi: [f64; 3], metric: [[f64; 4]; 4]) -> Result<Self> {
        if xi.iter().map(|x| x * x).sum::<f64>() == 0.0 {
            return Err(FgError::InvalidParameter("ξ must be non-zero".into()));
        }
        let g = Matrix4::from_fn(|a, b| metric[a][b]);
        if (g - g.transpose()).abs().max() > 0.0 || g.cholesky().is_none() {
            return Err(FgError::InvalidParameter(
                "metric must be symmetric positive definite".into(),
            ));
        }
        Ok(Self { xi, metric })
    }

    /// Components of `θ = ξ + z n` in a `g`-orthonormal coframe, each linear
    /// in `z`: index 0 normal, 1..3 tangential.
    fn frame_components(&self) -> [Poly; 4] {
        let g = Matrix4::from_fn(|a, b| self.metric[a][b]);
        // g = L Lᵀ; the coframe components of θ are L⁻¹θ.
        let l = g.cholesky().expect("checked at construction").l();
        let linv = l.try_inverse().expect("Cholesky factor is invertible");
        std::array::from_fn(|a| {
            let constant: f64 = (0..3).map(|j| linv[(a, j + 1)] * self.xi[j]).sum();
            Poly::linear(constant, linv[(a, 0)])
        })
    }

    /// The root `z⁺` of `|ξ + z n|²_g = 0` in the upper half plane.
    pub fn interior_root(&self) -> Complex64 {
        let theta = self.frame_components();
        let q = theta.iter().fold(Poly::zero(), |acc, p| acc.add(&p.mul(p)));
        let (c, b, a) = (q.coefficient(0), q.coefficient(1), q.coefficient(2));
        let disc = (b * b - a * c * 4.0).sqrt();
        let r1 = (-b + disc) / (a * 2.0);
        let r2 = (-b - disc) / (a * 2.0);
        if r1.im > 0.0 {
            r1
        } else {
            r2
        }
    }
}

/// `(z − z⁺)²⁰`, coefficients lowest degree first.
pub fn interior_root_polynomial(d: &CotangentDatum) -> Poly {
    let root = d.interior_root();
    let factor = Poly(vec![-root, Complex64::new(1.0, 0.0)]);
    (0..N_ROWS).fold(Poly::constant(1.0), |acc, _| acc.mul(&factor))
}

/// Roots of the biLaplacian symbol `(|ξ|² + z²)²` of one unknown, sorted by
/// imaginary part.
pub fn bilaplacian_roots(d: &CotangentDatum) -> Vec<Complex64> {
    let theta = d.frame_components();
    let q = theta.iter().fold(Poly::zero(), |acc, p| acc.add(&p.mul(p)));
    let mut roots = q.mul(&q).roots();
    roots.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    roots
}

/// Principal boundary symbol, 20 rows × 10 unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    pub entries: Vec<Vec<Poly>>,
}

impl SymbolMatrix {
    pub fn get(&self, row: usize, col: usize) -> &Poly {
        &self.entries[row][col]
    }

    /// Highest degree in each row (`None` for a zero row).
    pub fn row_degrees(&self) -> Vec<Option<usize>> {
        self.entries
            .iter()
            .map(|row| row.iter().filter_map(Poly::degree).max())
            .collect()
    }

    /// Copy with the order-3 block replaced by the order-1 block, which makes
    /// four rows linearly dependent.
    pub fn degenerate(&self) -> Self {
        let mut out = self.clone();
        for r in 0..4 {
            out.entries[BLOCK_STARTS[3] + r] = self.entries[BLOCK_STARTS[1] + r].clone();
        }
        out
    }
}

/// Assemble the symbol for the datum.
pub fn assemble_boundary_symbol(d: &CotangentDatum) -> SymbolMatrix {
    let [z, x1, x2, x3] = d.frame_components();
    let xi = [x1, x2, x3];
    let xi2 = xi.iter().fold(Poly::zero(), |acc, p| acc.add(&p.mul(p)));
    let wave = z.mul(&z).add(&xi2);
    let mut e = vec![vec![Poly::zero(); N_UNKNOWNS]; N_ROWS];
    for s in 0..6 {
        e[s][s] = Poly::constant(1.0);
        e[BLOCK_STARTS[2] + s][s] = wave.clone();
    }
    let r1 = BLOCK_STARTS[1];
    let r3 = BLOCK_STARTS[3];
    e[r1][6] = z.clone();
    for j in 0..3 {
        e[r1][7 + j] = xi[j].scale(2.0);
        e[r1 + 1 + j][6] = xi[j].scale(0.5);
        e[r1 + 1 + j][7 + j] = z.clone();
    }
    let cubic = z.mul(&wave);
    for a in 0..4 {
        e[r3 + a][6 + a] = cubic.clone();
    }
    for j in 0..3 {
        e[r3][7 + j] = xi2.mul(&xi[j]).scale(-1.0 / 3.0);
    }
    SymbolMatrix { entries: e }
}

/// Outcome of the complementing check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplementingReport {
    pub pass: bool,
    pub kernel_dimension: usize,
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
    /// Real and imaginary parts of each kernel vector `c ∈ ℂ²⁰`.
    #[serde(skip)]
    pub kernel: Vec<Vec<Complex64>>,
}

/// Relative singular-value threshold for the rank decision.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// A combination `Σ c_r B_r·` is divisible by `(z − z⁺)²` iff it vanishes
/// together with its derivative at `z⁺`; stack those 20 conditions and test
/// for a trivial kernel.
pub fn complementing_check_symbol(sym: &SymbolMatrix, root: Complex64) -> ComplementingReport {
    let m = DMatrix::from_fn(2 * N_UNKNOWNS, N_ROWS, |row, r| {
        let k = row / 2;
        let p = sym.get(r, k);
        if row % 2 == 0 {
            p.eval(root)
        } else {
            p.derivative().eval(root)
        }
    });
    let svd = m.svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let v_t = svd.v_t.expect("requested V");
    let kernel: Vec<Vec<Complex64>> = sv
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= RANK_THRESHOLD * smax)
        .map(|(i, _)| v_t.row(i).iter().map(|c| c.conj()).collect())
        .collect();
    ComplementingReport {
        pass: kernel.is_empty(),
        kernel_dimension: kernel.len(),
        smallest_singular_value: smin,
        largest_singular_value: smax,
        kernel,
    }
}

pub fn complementing_check(d: &CotangentDatum) -> ComplementingReport {
    complementing_check_symbol(&assemble_boundary_symbol(d), d.interior_root())
}

/// The same check on the degenerate symbol.
pub fn complementing_check_degenerate(d: &CotangentDatum) -> ComplementingReport {
    complementing_check_symbol(&assemble_boundary_symbol(d).degenerate(), d.interior_root())
}

/// Structural facts about the symbol: row degrees by block, overall maximum
/// degree, and the largest `z²` coefficient in the `h_{0a}` columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeReport {
    pub block_degrees: Vec<Option<usize>>,
    pub max_degree: usize,
    pub mixed_z2_max: f64,
}

impl DegreeReport {
    pub fn holds(&self) -> bool {
        self.block_degrees
            .iter()
            .zip(BLOCK_DEGREES)
            .all(|(d, want)| *d == Some(want))
            && self.max_degree <= 3
            && self.mixed_z2_max <= COEFF_ZERO
    }
}

pub fn degree_invariants(sym: &SymbolMatrix) -> DegreeReport {
    let rows = sym.row_degrees();
    let block_degrees = (0..4)
        .map(|b| {
            let ds: Vec<Option<usize>> = rows[BLOCK_STARTS[b]..BLOCK_STARTS[b + 1]].to_vec();
            if ds.iter().all(|d| *d == ds[0]) {
                ds[0]
            } else {
                None
            }
        })
        .collect();
    let max_degree = rows.iter().flatten().copied().max().unwrap_or(0);
    let mixed_z2_max = sym
        .entries
        .iter()
        .flat_map(|row| row[6..].iter())
        .map(|p| p.coefficient(2).norm())
        .fold(0.0, f64::max);
    DegreeReport {
        block_degrees,
        max_degree,
        mixed_z2_max,
    }
}
