//! Quantum error-corrected metrology on hidden-Markov noise models.
//!
//! A probe coupled to an inaccessible finite environment evolves under a joint
//! Lindblad master equation; only the probe (plus a noiseless auxiliary
//! register) is measured. This crate provides the numerical machinery to
//! decide what precision scaling survives that noise and to simulate the
//! protocols that attain it:
//!
//! - [`numkit`]: dense complex linear algebra generic over the scalar type
//!   (`f32`/`f64`), matrix exponentials, Hermitian eigensolvers, seeded RNG.
//! - [`model`]: the master-equation model, exact propagation of states
//!   together with their parameter sensitivity.
//! - [`spans`]: noise-generated operator spans and the span-membership
//!   classifiers for Heisenberg-limit vs. standard-quantum-limit scaling.
//! - [`qec`]: metrology code construction, generalized Knill-Laflamme checks,
//!   recovery channels, and projected (Zeno) evolution.
//! - [`metrology`]: quantum/classical Fisher-information formulas, coherence
//!   envelopes and revival search, binomial-mixture information.
//! - [`trajectory`]: prepare-and-measure simulation tracking only the
//!   environment state, with exact and Monte Carlo Fisher information.
//!
//! All physics modules work at `f64`; the concrete aliases [`CMat`] and
//! [`C64`] are the types they exchange.

pub mod metrology;
pub mod model;
pub mod numkit;
pub mod qec;
pub mod spans;
pub mod trajectory;

pub use numkit::matrix::ComplexMatrix;
pub use numkit::scalar::Scalar;

/// Complex scalar used by the physics modules.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix used by the physics modules.
pub type CMat = ComplexMatrix<f64>;

/// Errors surfaced by the numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian within tolerance (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical fault: {0}")]
    NumericalFault(String),
    #[error("Knill-Laflamme conditions violated (max residual {residual:.3e})")]
    KlViolated { residual: f64 },
    #[error("outcome tree of size {size} exceeds the exact-enumeration budget {budget}; use the Monte Carlo estimator instead")]
    BudgetExceeded { size: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
