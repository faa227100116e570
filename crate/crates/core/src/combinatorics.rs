//! Binomial coefficients, exact and in the log domain.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::scalar::{int, real, ExactInt, Real};

/// `C(n, k)` with overflow reported as `None`.
///
/// Uses the multiplicative recurrence `c_i = c_{i-1} * (n - k + i) / i`.
/// Dividing `gcd(c_{i-1}, i)` out first keeps every intermediate at most
/// the final value, so fixed-width types overflow only when the result does.
pub fn try_binomial<I: ExactInt>(n: u64, k: u64) -> Option<I> {
    if k > n {
        return Some(I::zero());
    }
    let k = k.min(n - k);
    let mut acc = I::one();
    for i in 1..=k {
        let i_big: I = int(i);
        let g = acc.gcd(&i_big);
        let factor = int::<I>(n - k + i) / (i_big / g.clone());
        acc = (acc / g).checked_mul(&factor)?;
    }
    Some(acc)
}

/// Exact `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    try_binomial(n, k).expect("BigUint arithmetic cannot overflow")
}

/// `C(n, k)` for a possibly negative upper index, where `C(n, k) = 0` for
/// `n < 0`. Formulas such as `C(n - ik - (r - i), k - 1)` go negative
/// outside their regime.
pub fn try_binomial_signed<I: ExactInt>(n: i64, k: i64) -> Option<I> {
    if n < 0 || k < 0 {
        return Some(I::zero());
    }
    try_binomial(n as u64, k as u64)
}

pub fn binomial_signed(n: i64, k: i64) -> BigUint {
    try_binomial_signed(n, k).expect("BigUint arithmetic cannot overflow")
}

/// Natural log of `C(n, k)`.
///
/// Summed as `Σ ln((n - k + i) / i)` over the shorter side, which stays
/// within a few ulps per term for every `n` this crate handles.
pub fn log_binomial<F: Real>(n: u64, k: u64) -> Result<F> {
    if k > n {
        return Err(Error::Domain(format!("log C({n}, {k}) with k > n")));
    }
    let k = k.min(n - k);
    let mut acc = 0.0f64;
    for i in 1..=k {
        acc += ((n - k + i) as f64 / i as f64).ln();
    }
    Ok(real(acc))
}

/// Signed-argument variant of [`log_binomial`]; rejects negatives.
pub fn log_binomial_signed<F: Real>(n: i64, k: i64) -> Result<F> {
    if n < 0 || k < 0 {
        return Err(Error::Domain(format!("log C({n}, {k}) with a negative argument")));
    }
    log_binomial(n as u64, k as u64)
}

/// Pascal table of `C(n, k)` for `n, k <= 64`, all of which fit in `u64`.
pub(crate) struct SmallBinomials([[u64; 65]; 65]);

impl SmallBinomials {
    const fn build() -> Self {
        let mut t = [[0u64; 65]; 65];
        let mut n = 0;
        while n <= 64 {
            t[n][0] = 1;
            let mut k = 1;
            while k <= n {
                t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
                k += 1;
            }
            n += 1;
        }
        SmallBinomials(t)
    }

    #[inline]
    pub(crate) fn get(&self, n: u32, k: u32) -> u64 {
        if k > n || n > 64 {
            0
        } else {
            self.0[n as usize][k as usize]
        }
    }
}

pub(crate) static SMALL_BINOMIALS: SmallBinomials = SmallBinomials::build();

#[inline]
pub(crate) fn small_binomial(n: u32, k: u32) -> u64 {
    SMALL_BINOMIALS.get(n, k)
}
