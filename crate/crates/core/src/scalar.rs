//! Scalar traits shared by the exact and log-domain formulas.
//!
//! Exact counts are generic over [`ExactInt`] (machine words or `BigUint`);
//! probabilities and logarithms are generic over [`Real`].

use std::fmt::{Debug, Display};

use num_bigint::BigUint;
use num_traits::{
    CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Float, FloatConst, FromPrimitive, ToPrimitive,
};

/// Non-negative exact integer. Fixed-width implementors signal overflow
/// through the checked operations; `BigUint` never overflows.
pub trait ExactInt:
    Clone
    + Ord
    + Debug
    + Display
    + num_traits::Unsigned
    + num_integer::Integer
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + CheckedDiv
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
{
}

impl ExactInt for u32 {}
impl ExactInt for u64 {}
impl ExactInt for u128 {}
impl ExactInt for BigUint {}

/// Floating point scalar for probabilities and log-domain values.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync {}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 is representable in every Real")
}

pub(crate) fn int<I: ExactInt>(x: u64) -> I {
    I::from_u64(x).expect("u64 value out of range for exact integer type")
}

/// Natural log of an exact integer. Values beyond the `f64` range are
/// scaled down by powers of two first.
pub fn ln_exact<I: ExactInt, F: Real>(x: &I) -> F {
    if x.is_zero() {
        return F::neg_infinity();
    }
    let two52: I = int(1u64 << 52);
    let mut scaled = x.clone();
    let mut shifts = 0u32;
    loop {
        match scaled.to_f64() {
            Some(v) if v.is_finite() => {
                let ln = v.ln() + f64::from(shifts) * 52.0 * std::f64::consts::LN_2;
                return real(ln);
            }
            _ => {
                scaled = scaled / two52.clone();
                shifts += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn ln_exact_small_and_huge() {
        let ten: f64 = ln_exact(&10u64);
        assert!((ten - 10f64.ln()).abs() < 1e-15);

        let big = BigUint::one() << 3000u32;
        let ln: f64 = ln_exact(&big);
        assert!((ln - 3000.0 * std::f64::consts::LN_2).abs() < 1e-9);

        let zero: f64 = ln_exact(&0u32);
        assert!(zero.is_infinite() && zero < 0.0);
    }
}
