//! Scalar abstractions.
//!
//! Rate algebra (transition rates, classical generators, chain profiles,
//! phase boundaries) only needs field operations and ordering, so it is
//! written against [`Scalar`] and runs unchanged on `f64` and on exact
//! rationals. Anything that integrates, exponentiates or takes square roots
//! needs [`Real`].

use std::fmt::Debug;
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like scalar with a total-enough order for rate bookkeeping.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// False for NaN and infinities; exact types are always finite.
    fn is_finite_value(&self) -> bool;

    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer fits scalar")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Floating-point scalar used by integrators, oracles and samplers.
pub trait Real: Scalar + Float + Sum + Copy + Default {
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to float")
    }
}

impl Scalar for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Real for f64 {}
impl Real for f32 {}

impl Scalar for Ratio<i64> {
    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Scalar for Ratio<i128> {
    fn is_finite_value(&self) -> bool {
        true
    }
}
