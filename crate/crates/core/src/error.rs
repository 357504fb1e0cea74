use thiserror::Error;

/// Grid location of a pointwise failure, as integer indices along the three axes.
pub type GridPoint = [usize; 3];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FgError {
    #[error("truncation order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("grid mismatch: {left} vs {right} points per axis")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("leading coefficient is singular at grid point {point:?} (condition number {condition:.3e})")]
    SingularLeading { point: GridPoint, condition: f64 },

    #[error("metric is not positive definite at grid point {point:?} (smallest eigenvalue {eigenvalue:.3e})")]
    NotPositiveDefinite { point: GridPoint, eigenvalue: f64 },

    #[error("conformal cancellation failed at order {order}: sup norm {norm:.3e}")]
    CancellationFailure { order: i32, norm: f64 },

    #[error("constraint violation: trace constraint {trace_norm:.3e}, divergence constraint {divergence_norm:.3e}, obstruction {obstruction_norm:.3e}")]
    ConstraintViolation {
        trace_norm: f64,
        divergence_norm: f64,
        obstruction_norm: f64,
    },

    #[error("indicial system singular at order {order} (grid point {point:?}, smallest singular value {singular_value:.3e})")]
    SingularIndicial {
        order: usize,
        point: GridPoint,
        singular_value: f64,
    },

    #[error("residual at order {order} is not affine in the unknown coefficient (defect {defect:.3e})")]
    NonAffineProbe { order: usize, defect: f64 },

    #[error("residual audit failed: order {order} has sup norm {norm:.3e} (tolerance {tolerance:.1e})")]
    ResidualAudit {
        order: usize,
        norm: f64,
        tolerance: f64,
    },

    #[error("leading coefficient of the conformal factor must be 1 (deviation {0:.3e})")]
    NonUnitConformalFactor(f64),

    #[error("unknown reference solution {0:?}")]
    UnknownReference(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed coefficient file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, FgError>;
