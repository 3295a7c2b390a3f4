//! Scalar abstraction: every numeric routine in this crate is generic over
//! the floating-point type it runs on.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar usable throughout the crate (`f32` or `f64`).
pub trait Scalar:
    Float
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; panics on values a float cannot hold
    /// (never happens for finite config constants).
    fn from_f64(v: f64) -> Self {
        Self::from(v).expect("f64 value representable as scalar")
    }

    /// Conversion from a count.
    fn from_usize(v: usize) -> Self {
        Self::from(v).expect("usize value representable as scalar")
    }

    /// Widening conversion used by the metrics code.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

macro_rules! impl_scalar {
    ($($t:ty)*) => {$(
        impl Scalar for $t {}
    )*}
}

impl_scalar!(f32 f64);
