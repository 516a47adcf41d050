//! Scalar abstraction for the real-valued parts of the library.
//!
//! Counting is always exact (big integers). Exponents, distances and
//! brackets are computed in any `Real`, which is implemented for `f32` and
//! `f64`. Tolerances below the precision of the chosen type are reported as
//! unreachable rather than silently met.

use std::fmt::{Debug, Display};

use num_bigint::BigUint;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in every Real")
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Natural logarithm of a positive big integer. Returns `-inf` for zero.
pub fn ln_big<T: Real>(n: &BigUint) -> T {
    let bits = n.bits();
    if bits == 0 {
        return T::neg_infinity();
    }
    if bits <= 1000 {
        return T::lit(n.to_f64().expect("fits in f64").ln());
    }
    let shift = bits - 64;
    let top: BigUint = n >> shift;
    let head = top.to_f64().expect("64-bit head").ln();
    T::lit(head + shift as f64 * std::f64::consts::LN_2)
}
