//! Fefferman–Graham expansion: boundary data, the order-by-order solver,
//! Lorentzian continuation, geodesic normalization and reference solutions.

pub mod data;
pub mod normalize;
pub mod reference;
pub mod solver;

pub use data::{validate_tt, BoundaryData, TtReport};
pub use solver::{
    compute_g2, expand, expand_unchecked, solve_order, wick_rotate, FGExpansion, G2Resolution,
};
pub use normalize::{geodesic_normalization, geodesic_normalize, GeodesicNormalization};
pub use reference::{reference, AdsSchwarzschildSeries, ReferenceSampler};
