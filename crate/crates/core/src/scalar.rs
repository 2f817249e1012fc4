//! Floating-point scalar abstraction.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// A floating-point type the measures can be computed in.
///
/// Besides the arithmetic bounds, each scalar carries the numerical
/// tolerances used throughout the crate, scaled to its precision.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Maximum deviation of a distribution's total from one that is accepted as-is.
    fn validation_tol() -> Self;
    /// Maximum deviation of a distribution's total from one that may be renormalized.
    fn renormalize_tol() -> Self;
    /// Magnitude below which a local information value is treated as exactly zero.
    fn zero_band() -> Self;
    /// Residual `|πW - π|_1` accepted for a stationary distribution.
    fn stationary_tol() -> Self;

    /// Converts an `f64` literal. Every finite `f64` is representable (possibly rounded).
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn validation_tol() -> Self {
        1e-9
    }
    fn renormalize_tol() -> Self {
        1e-6
    }
    fn zero_band() -> Self {
        1e-12
    }
    fn stationary_tol() -> Self {
        1e-8
    }
}

impl Scalar for f32 {
    fn validation_tol() -> Self {
        1e-5
    }
    fn renormalize_tol() -> Self {
        1e-4
    }
    fn zero_band() -> Self {
        1e-6
    }
    fn stationary_tol() -> Self {
        1e-5
    }
}

/// Sign of a local information value, with values inside [`Scalar::zero_band`] counted as zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

pub fn sign_of<T: Scalar>(x: T) -> Sign {
    if x > T::zero_band() {
        Sign::Positive
    } else if x < -T::zero_band() {
        Sign::Negative
    } else {
        Sign::Zero
    }
}
