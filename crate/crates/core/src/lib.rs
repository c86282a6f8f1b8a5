//! Monge-Ampère structures on 6-dimensional symplectic space.

pub mod error;
pub mod exterior;
pub mod fields;
pub mod hitchin;
pub mod json;
pub mod linalg;
pub mod matode;
pub mod monge_ampere;
pub mod scalar;
pub mod stenzel;
pub mod symplectic;

pub use error::{Error, Result};
pub use exterior::{Form, LinearMap, Vector};
pub use scalar::{Rational, RealScalar, Scalar};
