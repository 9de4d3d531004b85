//! Dense complex linear algebra, randomness, and numerical kernels.
//!
//! Everything here is generic over the real scalar type through
//! [`scalar::Scalar`]; the rest of the crate instantiates it at `f64`.

pub mod eig;
pub mod expm;
pub mod matrix;
pub mod rng;
pub mod scalar;
pub mod svd;

pub use eig::{herm_eig, HermitianEigenSystem};
pub use expm::expm;
pub use matrix::{hs_inner, ComplexMatrix};
pub use rng::{ginibre, haar_state, RngStream};
pub use svd::{span_basis, SpanSvd};
