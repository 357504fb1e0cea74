//! Curvature calculus for series-valued metrics.

pub mod boundary;
pub mod bulk;
pub mod curvature;
pub mod einstein;
pub mod operators;
pub mod tensor;

pub use boundary::{
    boundary_curvature, boundary_identities_check, Boundary3Curvature, BoundaryIdentityReport,
};
pub use bulk::{physical_metric_about, BulkMetric};
pub use curvature::{Connection, Curvature4, FourTensor, SymmetryDefects};
pub use einstein::{einstein_residual, einstein_residual_general};
pub use operators::{bach, bianchi_op, divergence, trace};
pub use tensor::{Chart, SymTensor};
