//! Chart-local numerical differential geometry for almost Hermitian
//! manifolds, holomorphic maps and harmonic morphisms.

pub mod catalog;
pub mod error;
pub mod hermitian;
pub mod manifold;
pub mod maps;
pub mod numdiff;
pub mod sampling;
pub mod scenarios;

pub use error::{GeoError, Result};
pub use numdiff::{DiffConfig, Point};
pub use sampling::SamplePlan;
