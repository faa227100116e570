//! Problem parameters `(n, k, r)` and the closed-form quantities built on
//! them: vertex count, trivial independent set size, edge counts, the
//! critical probability and the expected number of "trivial plus one"
//! independent families.

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::combinatorics::{log_binomial, log_binomial_signed, try_binomial, try_binomial_signed};
use crate::error::{Error, Result};
use crate::scalar::{int, ln_exact, real, ExactInt, Real};

/// Validated `(n, k, r)` with `k >= 2`, `r >= 2`, `n >= 2k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct Params {
    n: u32,
    k: u32,
    r: u32,
    emc_regime: bool,
    frankl_regime: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr {
    n: u32,
    k: u32,
    r: u32,
}

impl TryFrom<ParamsRepr> for Params {
    type Error = Error;

    fn try_from(p: ParamsRepr) -> Result<Self> {
        Params::new(p.n, p.k, p.r)
    }
}

impl From<Params> for ParamsRepr {
    fn from(p: Params) -> Self {
        ParamsRepr { n: p.n, k: p.k, r: p.r }
    }
}

impl Params {
    pub fn new(n: u32, k: u32, r: u32) -> Result<Self> {
        if k < 2 || r < 2 || n < 2 * k {
            return Err(Error::InvalidParams(format!(
                "need k >= 2, r >= 2, n >= 2k; got n = {n}, k = {k}, r = {r}"
            )));
        }
        let (n64, k64, r64) = (u64::from(n), u64::from(k), u64::from(r));
        // n >= r(k + 1/2)  <=>  2n >= r(2k + 1)
        let emc_regime = 2 * n64 >= r64 * (2 * k64 + 1);
        // n >= (2r - 1)k - r + 1
        let frankl_regime = n64 + r64 >= (2 * r64 - 1) * k64 + 1;
        Ok(Params { n, k, r, emc_regime, frankl_regime })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `n >= r(k + 1/2)`: the trivial families are the conjectured maxima.
    pub fn emc_regime(&self) -> bool {
        self.emc_regime
    }

    /// `n >= (2r - 1)k - r + 1`: the matching conjecture is a theorem here.
    pub fn frankl_regime(&self) -> bool {
        self.frankl_regime
    }

    /// Whether the model layer (bitmask vertices) can represent `[n]`.
    pub fn fits_bitmask(&self) -> bool {
        self.n <= crate::subset::MAX_GROUND
    }

    pub(crate) fn require_bitmask(&self) -> Result<()> {
        if self.fits_bitmask() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "n = {} exceeds the {}-element ground set the model supports",
                self.n,
                crate::subset::MAX_GROUND
            )))
        }
    }
}

/// Log-domain copies of the exact counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogQuantities<F> {
    pub v: F,
    pub n_trivial: F,
    pub m: F,
    pub total_edges: F,
    /// `ln(C(n, r-1) C(n-r+1, k))`
    pub pairs: F,
}

/// Every exact quantity attached to `(n, k, r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "I: ExactInt, F: Serialize"))]
pub struct DerivedQuantities<I, F> {
    #[serde(serialize_with = "serialize_count")]
    pub v: I,
    /// `C(n,k) - C(n-r+1,k)`: size of a union of `r - 1` stars.
    #[serde(rename = "N", serialize_with = "serialize_count")]
    pub n_trivial: I,
    /// `N_i = C(n-i, k-1)` for `i = 1..r-1`.
    #[serde(rename = "N_i", serialize_with = "serialize_counts")]
    pub n_i: Vec<I>,
    /// `Π_{i=1}^{r-1} C(n - ik - (r-i), k-1)`: edges inside a trivial family
    /// plus one outside vertex.
    #[serde(rename = "M", serialize_with = "serialize_count")]
    pub m: I,
    /// `C(n-1,k-1) - C(n-k-1,k-1)`
    #[serde(rename = "H", serialize_with = "serialize_count")]
    pub h: I,
    #[serde(serialize_with = "serialize_count")]
    pub total_edges: I,
    /// `C(n, r-1) C(n-r+1, k)`: number of (trivial family, extra vertex) pairs.
    #[serde(serialize_with = "serialize_count")]
    pub trivial_plus_one_pairs: I,
    pub log: LogQuantities<F>,
    pub p_c: Option<CriticalProbability<F>>,
}

/// Counts that fit a `u64` serialize as JSON numbers, larger ones as
/// decimal strings.
pub(crate) fn serialize_count<I: ExactInt, S: Serializer>(
    x: &I,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x.to_u64() {
        Some(v) => s.serialize_u64(v),
        None => s.serialize_str(&x.to_string()),
    }
}

fn serialize_counts<I: ExactInt, S: Serializer>(
    xs: &[I],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        match x.to_u64() {
            Some(v) => seq.serialize_element(&v)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

fn binom<I: ExactInt>(n: i64, k: i64, what: &'static str) -> Result<I> {
    try_binomial_signed(n, k).ok_or(Error::Overflow(what))
}

fn mul<I: ExactInt>(a: I, b: &I, what: &'static str) -> Result<I> {
    a.checked_mul(b).ok_or(Error::Overflow(what))
}

/// `Π_{i=1}^{q-1} C(n - ik - q + i, k - 1)`; at `q = r` this is `M`.
pub fn star_product<I: ExactInt>(n: u32, k: u32, q: u32) -> Result<I> {
    let (n, k, q) = (i64::from(n), i64::from(k), i64::from(q));
    let mut acc = I::one();
    for i in 1..q {
        acc = mul(acc, &binom(n - i * k - q + i, k - 1, "M")?, "M")?;
    }
    Ok(acc)
}

fn log_star_product<F: Real>(n: u32, k: u32, q: u32) -> Option<F> {
    let (n, k, q) = (i64::from(n), i64::from(k), i64::from(q));
    let mut acc = 0.0f64;
    for i in 1..q {
        let top = n - i * k - q + i;
        if top < k - 1 {
            return None;
        }
        acc += log_binomial_signed::<f64>(top, k - 1).ok()?;
    }
    Some(real(acc))
}

/// `C(n, k) - C(n - r + 1, k)`.
pub fn trivial_size<I: ExactInt>(n: u32, k: u32, r: u32) -> Result<I> {
    let v: I = binom(i64::from(n), i64::from(k), "V")?;
    let rest: I = binom(i64::from(n) - i64::from(r) + 1, i64::from(k), "N")?;
    v.checked_sub(&rest).ok_or(Error::Overflow("N"))
}

/// `(1 / r!) Π_{i=0}^{r-1} C(n - ik, k)`.
pub fn total_edges_formula<I: ExactInt>(n: u32, k: u32, r: u32) -> Result<I> {
    let (n64, k64) = (i64::from(n), i64::from(k));
    let mut ordered = I::one();
    let mut factorial = I::one();
    for i in 0..i64::from(r) {
        ordered = mul(ordered, &binom(n64 - i * k64, k64, "|E|")?, "|E|")?;
        factorial = mul(factorial, &int(i as u64 + 1), "r!")?;
    }
    debug_assert!((ordered.clone() % factorial.clone()).is_zero());
    ordered.checked_div(&factorial).ok_or(Error::Overflow("|E|"))
}

impl<I: ExactInt, F: Real> DerivedQuantities<I, F> {
    pub fn compute(params: &Params) -> Result<Self> {
        let (n, k, r) = (params.n, params.k, params.r);
        let (n64, k64) = (i64::from(n), i64::from(k));

        let v: I = binom(n64, k64, "V")?;
        let n_trivial: I = trivial_size(n, k, r)?;
        let n_i = (1..i64::from(r))
            .map(|i| binom(n64 - i, k64 - 1, "N_i"))
            .collect::<Result<Vec<I>>>()?;
        let m: I = star_product(n, k, r)?;
        let h: I = binom::<I>(n64 - 1, k64 - 1, "H")?
            .checked_sub(&binom(n64 - k64 - 1, k64 - 1, "H")?)
            .ok_or(Error::Overflow("H"))?;
        let total_edges: I = total_edges_formula(n, k, r)?;
        let trivial_plus_one_pairs = mul(
            binom(n64, i64::from(r) - 1, "pairs")?,
            &binom(n64 - i64::from(r) + 1, k64, "pairs")?,
            "pairs",
        )?;

        let log = LogQuantities {
            v: log_binomial(u64::from(n), u64::from(k))?,
            n_trivial: ln_exact(&n_trivial),
            m: log_star_product(n, k, r).unwrap_or_else(F::neg_infinity),
            total_edges: ln_exact(&total_edges),
            pairs: ln_pairs(params)?,
        };
        let p_c = if params.emc_regime { Some(p_critical(params)?) } else { None };

        Ok(DerivedQuantities { v, n_trivial, n_i, m, h, total_edges, trivial_plus_one_pairs, log, p_c })
    }
}

/// Exact quantities with `BigUint` counts and `f64` logs.
pub fn derive(params: &Params) -> Result<crate::Quantities> {
    DerivedQuantities::compute(params)
}

fn ln_pairs<F: Real>(params: &Params) -> Result<F> {
    let n = u64::from(params.n);
    let r = u64::from(params.r);
    let a: F = log_binomial(n, r - 1)?;
    let b: F = log_binomial(n - r + 1, u64::from(params.k))?;
    Ok(a + b)
}

/// The threshold probability `ln(C(n,r-1) C(n-r+1,k)) / M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalProbability<F> {
    pub value: F,
    /// Set when the formula lands above 1, which happens at small `n`.
    pub exceeds_one: bool,
}

pub fn p_critical<F: Real>(params: &Params) -> Result<CriticalProbability<F>> {
    if !params.emc_regime {
        return Err(Error::OutOfRegime(format!(
            "p_c needs n >= r(k + 1/2); n = {}, k = {}, r = {}",
            params.n, params.k, params.r
        )));
    }
    let ln_pairs: F = ln_pairs(params)?;
    let ln_m: F = log_star_product(params.n, params.k, params.r)
        .ok_or_else(|| Error::OutOfRegime("M vanishes".into()))?;
    let value = (ln_pairs.ln() - ln_m).exp();
    Ok(CriticalProbability { value, exceeds_one: value > F::one() })
}

fn check_probability<F: Real>(p: F) -> Result<()> {
    if p >= F::zero() && p <= F::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside [0, 1]")))
    }
}

/// `C(n, r-1) C(n-r+1, k) (1-p)^M`, evaluated in the log domain.
pub fn expected_trivial_plus_one<F: Real>(params: &Params, p: F) -> Result<F> {
    check_probability(p)?;
    let ln_pairs: F = ln_pairs(params)?;
    let m: crate::Count = star_product(params.n, params.k, params.r)?;
    if p.is_zero() || m.is_zero() {
        return Ok(ln_pairs.exp());
    }
    if p == F::one() {
        return Ok(F::zero());
    }
    let m_real: F = real(m.to_f64().unwrap_or(f64::INFINITY));
    Ok((ln_pairs + m_real * (-p).ln_1p()).exp())
}


#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmcBranch {
    /// `C(rk-1, k)`: every k-subset of `[rk-1]`.
    Clique,
    /// `C(n,k) - C(n-r+1,k)`: a union of `r - 1` stars.
    Stars,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmcValue<I: ExactInt> {
    #[serde(serialize_with = "serialize_count")]
    pub value: I,
    pub branch: EmcBranch,
}

/// `max{C(rk-1, k), C(n,k) - C(n-r+1,k)}`, defined for `n >= rk - 1`.
/// Ties report the star branch.
pub fn emc_value<I: ExactInt>(params: &Params) -> Result<EmcValue<I>> {
    let (n, k, r) = (u64::from(params.n), u64::from(params.k), u64::from(params.r));
    if n + 1 < r * k {
        return Err(Error::OutOfRegime(format!("need n >= rk - 1; n = {n}, rk - 1 = {}", r * k - 1)));
    }
    let clique: I = try_binomial(r * k - 1, k).ok_or(Error::Overflow("C(rk-1,k)"))?;
    let stars: I = trivial_size(params.n, params.k, params.r)?;
    Ok(if stars >= clique {
        EmcValue { value: stars, branch: EmcBranch::Stars }
    } else {
        EmcValue { value: clique, branch: EmcBranch::Clique }
    })
}

/// `C(n-1,k-1) - C(n-k-1,k-1) + 1` for `n > 2k`.
pub fn hilton_milner_bound<I: ExactInt>(n: u32, k: u32) -> Result<I> {
    if k < 1 || n <= 2 * k {
        return Err(Error::OutOfRegime(format!("need n > 2k; n = {n}, k = {k}")));
    }
    let (n, k) = (i64::from(n), i64::from(k));
    binom::<I>(n - 1, k - 1, "HM")?
        .checked_sub(&binom(n - k - 1, k - 1, "HM")?)
        .and_then(|d| d.checked_add(&I::one()))
        .ok_or(Error::Overflow("HM"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::binomial;
    use num_bigint::BigUint;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn params_validation_and_regimes() {
        assert!(Params::new(10, 1, 2).is_err());
        assert!(Params::new(10, 2, 1).is_err());
        assert!(Params::new(3, 2, 2).is_err());
        let p = Params::new(8, 2, 3).unwrap();
        assert!(p.emc_regime() && p.frankl_regime());
        let p = Params::new(7, 2, 3).unwrap();
        assert!(!p.emc_regime() && !p.frankl_regime());
        // 2n >= r(2k+1): n = 5, k = 2, r = 2 -> 10 >= 10
        assert!(Params::new(5, 2, 2).unwrap().emc_regime());
        assert!(!Params::new(4, 2, 2).unwrap().emc_regime());
    }

    #[test]
    fn params_serde_round_trip_rejects_unknown_keys() {
        let p = Params::new(10, 2, 3).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"n":10,"k":2,"r":3}"#);
        assert_eq!(serde_json::from_str::<Params>(&s).unwrap(), p);
        assert!(serde_json::from_str::<Params>(r#"{"n":10,"k":2,"r":3,"p":0.1}"#).is_err());
        assert!(serde_json::from_str::<Params>(r#"{"n":3,"k":2,"r":3}"#).is_err());
    }

    #[test]
    fn derive_examples() {
        let q = derive(&Params::new(10, 2, 2).unwrap()).unwrap();
        assert_eq!(q.v, big(45));
        assert_eq!(q.n_trivial, big(9));
        assert_eq!(q.n_i, vec![big(9)]);
        assert_eq!(q.m, big(7));
        assert_eq!(q.h, big(2));

        let q = derive(&Params::new(10, 2, 3).unwrap()).unwrap();
        assert_eq!(q.n_trivial, big(17));
        assert_eq!(q.n_i, vec![big(9), big(8)]);
        assert_eq!(q.m, big(30));

        for k in 2..8u32 {
            let q = derive(&Params::new(2 * k, k, 2).unwrap()).unwrap();
            let kk = u64::from(k);
            assert_eq!(q.n_trivial, binomial(2 * kk - 1, kk - 1));
        }
    }

    #[test]
    fn derive_json_shape() {
        let q = derive(&Params::new(10, 2, 3).unwrap()).unwrap();
        let v = serde_json::to_value(&q).unwrap();
        assert_eq!(v["N"], 17);
        assert_eq!(v["N_i"], serde_json::json!([9, 8]));
        assert_eq!(v["M"], 30);
        assert_eq!(v["total_edges"], 3150);
    }

    #[test]
    fn narrow_integers_report_overflow() {
        let p = Params::new(64, 20, 3).unwrap();
        assert!(matches!(
            DerivedQuantities::<u32, f64>::compute(&p),
            Err(Error::Overflow(_))
        ));
        let wide = DerivedQuantities::<u128, f64>::compute(&Params::new(30, 3, 3).unwrap()).unwrap();
        let exact = derive(&Params::new(30, 3, 3).unwrap()).unwrap();
        assert_eq!(BigUint::from(wide.total_edges), exact.total_edges);
        assert_eq!(BigUint::from(wide.m), exact.m);
    }

    #[test]
    fn p_critical_examples() {
        let pc = |n| p_critical::<f64>(&Params::new(n, 2, 2).unwrap()).unwrap();
        // ln(C(20,1) C(19,2)) / C(17,1) and ln(C(30,1) C(29,2)) / C(27,1)
        assert!((pc(20).value - (20.0f64 * 171.0).ln() / 17.0).abs() < 1e-12);
        assert!((pc(20).value - 0.47866).abs() < 1e-4);
        assert!((pc(30).value - (30.0f64 * 406.0).ln() / 27.0).abs() < 1e-12);
        assert!((pc(30).value - 0.34843).abs() < 1e-4);
        assert!((pc(10).value - 0.8409).abs() < 1e-4);
        assert!(!pc(10).exceeds_one);
        // n = 5: ln(5 * 6) / C(2,1) = 1.70 > 1
        assert!(pc(5).exceeds_one);
        assert!(p_critical::<f64>(&Params::new(7, 2, 3).unwrap()).is_err());
        let single = p_critical::<f32>(&Params::new(30, 2, 2).unwrap()).unwrap();
        assert!((f64::from(single.value) - 0.34843).abs() < 1e-4);
    }

    #[test]
    fn expected_trivial_plus_one_examples() {
        let p = Params::new(10, 2, 2).unwrap();
        let e: f64 = expected_trivial_plus_one(&p, 0.1).unwrap();
        assert!((e - 360.0 * 0.9f64.powi(7)).abs() < 1e-9);
        assert!((e - 172.187).abs() < 1e-3);
        let e0: f64 = expected_trivial_plus_one(&p, 0.0).unwrap();
        assert!((e0 - 360.0).abs() < 1e-9);
        let e1: f64 = expected_trivial_plus_one(&p, 1.0).unwrap();
        assert_eq!(e1, 0.0);
        assert!(expected_trivial_plus_one(&p, 1.5f64).is_err());
    }

    #[test]
    fn emc_value_examples() {
        let v = emc_value::<u64>(&Params::new(8, 2, 3).unwrap()).unwrap();
        assert_eq!((v.value, v.branch), (13, EmcBranch::Stars));
        let v = emc_value::<u64>(&Params::new(7, 2, 3).unwrap()).unwrap();
        assert_eq!((v.value, v.branch), (11, EmcBranch::Stars));
        for n in 4..20u32 {
            let v = emc_value::<BigUint>(&Params::new(n, 2, 2).unwrap()).unwrap();
            assert_eq!(v.value, binomial(u64::from(n) - 1, 1));
            assert_eq!(v.branch, EmcBranch::Stars);
        }
        // n = 3k - 1 for r = 3: the clique C(3k-1, k) wins at k = 3, n = 8
        let v = emc_value::<u64>(&Params::new(8, 3, 3).unwrap()).unwrap();
        assert_eq!(v.branch, EmcBranch::Clique);
        assert_eq!(v.value, 56);
        assert!(emc_value::<u64>(&Params::new(8, 3, 4).unwrap()).is_err());
    }

    #[test]
    fn hilton_milner_examples() {
        assert_eq!(hilton_milner_bound::<u64>(6, 2).unwrap(), 3);
        assert_eq!(hilton_milner_bound::<u64>(5, 2).unwrap(), 3);
        for k in 2..10u32 {
            let kk = u64::from(k);
            let expect = binomial(2 * kk, kk - 1) - binomial(kk, kk - 1) + big(1);
            assert_eq!(hilton_milner_bound::<BigUint>(2 * k + 1, k).unwrap(), expect);
        }
        assert!(hilton_milner_bound::<u64>(4, 2).is_err());
    }
}
