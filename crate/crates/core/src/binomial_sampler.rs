//! Exact Binomial(n, p) variates.
//!
//! Inversion is done outward from the mode, alternating sides, so the
//! starting mass never underflows even when `(1 - p)^n` does. Above
//! [`INVERSION_WORK_LIMIT`] expected work the BTPE accept-reject sampler
//! from `rand_distr` takes over.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::combinatorics::log_binomial;

/// `n * min(p, 1 - p)` above which accept-reject is used.
pub const INVERSION_WORK_LIMIT: f64 = 1e6;

pub fn sample_binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    assert!((0.0..=1.0).contains(&p), "binomial probability {p} outside [0, 1]");
    if n == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    let flip = p > 0.5;
    let q = if flip { 1.0 - p } else { p };
    let x = if n as f64 * q <= INVERSION_WORK_LIMIT {
        invert_from_mode(rng, n, q)
    } else {
        Binomial::new(n, q).expect("q in (0, 0.5]").sample(rng)
    };
    if flip {
        n - x
    } else {
        x
    }
}

fn invert_from_mode<R: Rng + ?Sized>(rng: &mut R, n: u64, q: f64) -> u64 {
    let mode = (((n + 1) as f64) * q).floor().min(n as f64) as u64;
    let ln_pmf_mode = log_binomial::<f64>(n, mode).expect("mode <= n")
        + mode as f64 * q.ln()
        + (n - mode) as f64 * (-q).ln_1p();
    let pmf_mode = ln_pmf_mode.exp();
    let odds = q / (1.0 - q);

    let u: f64 = rng.random();
    let mut acc = pmf_mode;
    if u < acc {
        return mode;
    }
    // Neighbouring masses by the ratio recurrences, stepping up then down.
    let (mut hi, mut pmf_hi) = (mode, pmf_mode);
    let (mut lo, mut pmf_lo) = (mode, pmf_mode);
    loop {
        let can_up = hi < n;
        let can_down = lo > 0;
        if !can_up && !can_down {
            // Rounding left u above the accumulated mass.
            return mode;
        }
        if can_up {
            pmf_hi *= (n - hi) as f64 / (hi + 1) as f64 * odds;
            hi += 1;
            acc += pmf_hi;
            if u < acc {
                return hi;
            }
        }
        if can_down {
            pmf_lo *= lo as f64 / (n - lo + 1) as f64 / odds;
            lo -= 1;
            acc += pmf_lo;
            if u < acc {
                return lo;
            }
        }
    }
}
