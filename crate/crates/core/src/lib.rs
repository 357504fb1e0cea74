pub mod coeff_file;
pub mod config;
pub mod ellipticity;
pub mod error;
pub mod fg;
pub mod field;
pub mod geometry;
pub mod linearized;
pub mod series;
pub mod symform;

pub use config::Tolerances;
pub use error::{FgError, Result};
pub use field::{FourierMode, GridSpec, ScalarField};
pub use series::{LaurentSeries, Series, TSeries};
pub use symform::SymForm;
