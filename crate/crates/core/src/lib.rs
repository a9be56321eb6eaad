//! Numerical laboratory for the Willmore energy of surfaces in ℝ³ and S³.

pub mod acceptance;
pub mod conformal_lab;
pub mod curves;
pub mod eigen;
pub mod error;
pub mod family;
pub mod jet;
pub mod optimize;
pub mod quadrature;
pub mod s3;
pub mod shapes;
pub mod spectral;
pub mod surface;

pub use error::{Error, Result};
