//! Dephasing-dominated open quantum dynamics reduced to classical jump processes.
//!
//! The numeric core is generic over [`scalar::Scalar`]; the aliases below fix
//! the common choices.

pub mod error;
pub mod fock;
pub mod linalg;
pub mod ode;
pub mod scalar;
pub mod system;
pub mod lindblad;
pub mod reduction;
pub mod stochastic;
pub mod transport;

pub use error::{Error, Result};
pub use system::{ParticleStatistics, Truncation};

/// Exact rational scalar used for symbolic generator checks.
pub type Rational = num_rational::Ratio<i64>;

pub type SystemSpec64 = system::SystemSpec<f64>;
pub type SystemSpec32 = system::SystemSpec<f32>;
pub type SystemSpecQ = system::SystemSpec<Rational>;
pub type Superoperator64 = lindblad::Superoperator<f64>;
pub type ClassicalGenerator64 = reduction::ClassicalGenerator<f64>;
pub type ClassicalGeneratorQ = reduction::ClassicalGenerator<Rational>;
pub type RateMatrix64 = reduction::RateMatrix<f64>;
pub type RateMatrixQ = reduction::RateMatrix<Rational>;
pub type TransitionRateMatrix64 = reduction::TransitionRateMatrix<f64>;
pub type ChainModel64 = transport::ChainModel<f64>;
