//! Sum-of-squares certificates for polynomials on the cylinder `S¹ × ℝ`.
//!
//! The ring is ℝ[C][y] with C the unit circle `x1² + x2² = 1`. The crate
//! decides nonnegativity at desk scale, builds explicit certificates
//! `f = Σ multiplier·square²`, and verifies them independently.

pub mod cylinder;
pub mod envelope;
pub mod error;
pub mod linalg;
pub mod pipeline;
pub mod poly;
pub mod scalar;
pub mod sos;
pub mod verify;

pub use error::{Error, Result, Witness};
pub use scalar::{Rational, Scalar, ScalarMode};
