//! Scalar abstractions.
//!
//! Geometry and spectral code is written against [`Real`] (any IEEE float),
//! while the linear-programming layer only needs an ordered field and is
//! written against [`LpScalar`], which is also implemented for exact
//! rationals.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Tolerance used when a computation needs to decide "is this zero".
    fn default_eps() -> Self;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }
}

impl Real for f32 {
    fn default_eps() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn default_eps() -> Self {
        1e-12
    }
}

/// Ordered field used by the simplex solver.
///
/// `is_negligible` is exact for rationals and tolerance-based for floats.
pub trait LpScalar: Clone + Num + Signed + PartialOrd + Debug + Send + Sync {
    fn is_negligible(&self) -> bool;

    fn from_f64_exact(v: f64) -> Option<Self>;

    fn to_f64_lossy(&self) -> f64;

    fn is_positive_strict(&self) -> bool {
        !self.is_negligible() && self.is_positive()
    }

    fn is_negative_strict(&self) -> bool {
        !self.is_negligible() && self.is_negative()
    }
}

impl LpScalar for f64 {
    fn is_negligible(&self) -> bool {
        self.abs() <= 1e-10
    }

    fn from_f64_exact(v: f64) -> Option<Self> {
        Some(v)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl LpScalar for f32 {
    fn is_negligible(&self) -> bool {
        self.abs() <= 1e-5
    }

    fn from_f64_exact(v: f64) -> Option<Self> {
        Some(v as f32)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl LpScalar for BigRational {
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn from_f64_exact(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }

    fn to_f64_lossy(&self) -> f64 {
        let numer = self.numer().to_f64().unwrap_or(f64::NAN);
        let denom = self.denom().to_f64().unwrap_or(f64::NAN);
        if numer.is_finite() && denom.is_finite() {
            return numer / denom;
        }
        // Large operands: scale down before dividing.
        let shift = self
            .numer()
            .bits()
            .max(self.denom().bits())
            .saturating_sub(1000);
        let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    }
}

/// Build an exact rational `numer / denom`.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}
