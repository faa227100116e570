//! One-shot battery of brute-force cross-checks: closed forms against
//! enumeration, the solvers against each other and against exhaustive
//! search, the two samplers against each other and the mean of `Y`
//! against its formula.
//!
//! Every check uses fixed seeds, so a report is a pure function of the
//! options.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{binomial, small_binomial};
use crate::error::Result;
use crate::experiments::y_statistic;
use crate::extremal::{check_corollary_on_lex, ekr_oracle, emc_oracle, verify_lex_minimality};
use crate::model::{
    complete, induced_edge_count, sample, total_edge_count, trivial_plus_one_edge_count, SampledHypergraph,
    SamplerKind, COUNT_BUDGET,
};
use crate::params::{derive, expected_trivial_plus_one, star_product, Params};
use crate::rng::{derive_seed, stream};
use crate::solver::{is_independent, max_independent_set, min_hitting_set, min_hitting_set_by_branching, DEFAULT_NODE_BUDGET};
use crate::subset::{all_subsets, lex_unrank, Family, KSubset};

/// Closed form for the edges inside a star union plus one vertex.
pub type MFormula = fn(u32, u32, u32) -> Result<u64>;

/// `Π_{i=1}^{r-1} C(n - ik - (r - i), k - 1)`
pub fn standard_m(n: u32, k: u32, r: u32) -> Result<u64> {
    star_product(n, k, r)
}

pub struct VerifyOptions {
    /// Fewer seeds and trials for the statistical checks.
    pub fast: bool,
    pub m_formula: MFormula,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { fast: false, m_formula: standard_m }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub fast: bool,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

const MASTER: u64 = 0x5EED_0F_0AC1E;

pub fn verify_suite(options: &VerifyOptions) -> VerifyReport {
    type Check = fn(&VerifyOptions) -> Result<(bool, String)>;
    let checks: [(&'static str, Check); 9] = [
        ("identities", identities),
        ("m_oracle", m_oracle),
        ("total_edges", total_edges),
        ("classical_values", classical_values),
        ("solver_vs_exhaustive", solver_vs_exhaustive),
        ("duality", duality),
        ("sampler_equivalence", sampler_equivalence),
        ("expected_y", expected_y),
        ("lex_minimality", lex_minimality),
    ];
    let checks: Vec<CheckResult> = checks
        .into_iter()
        .map(|(name, f)| match f(options) {
            Ok((passed, detail)) => CheckResult { name, passed, detail },
            Err(e) => CheckResult { name, passed: false, detail: format!("error: {e}") },
        })
        .collect();
    VerifyReport { fast: options.fast, passed: checks.iter().all(|c| c.passed), checks }
}

fn identities(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut checked = 0;
    let mut failures = Vec::new();
    for k in 2..=5u32 {
        for r in 2..=5u32 {
            for n in r * k..=40 {
                let q = derive(&Params::new(n, k, r)?)?;
                let (n64, k64, r_big) = (u64::from(n), u64::from(k), crate::Count::from(r - 1));
                let sum: crate::Count = q.n_i.iter().sum();
                let h_bound = binomial(n64 - 2, k64 - 2) * k;
                let lo = &r_big * binomial(n64 - u64::from(r) + 1, k64 - 1);
                let hi = &r_big * binomial(n64 - 1, k64 - 1);
                if sum != q.n_trivial || q.h > h_bound || lo > q.n_trivial || q.n_trivial > hi {
                    failures.push(format!("({n},{k},{r})"));
                }
                checked += 1;
            }
        }
    }
    Ok((failures.is_empty(), format!("{checked} parameter sets, failures: {failures:?}")))
}

const M_INSTANCES: [(u32, u32, u32); 5] = [(8, 2, 2), (10, 2, 2), (10, 2, 3), (12, 3, 2), (11, 2, 4)];

fn m_oracle(opts: &VerifyOptions) -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for (i, &(n, k, r)) in M_INSTANCES.iter().enumerate() {
        let params = Params::new(n, k, r)?;
        let expected = (opts.m_formula)(n, k, r)?;
        let mut rng = stream(derive_seed(MASTER, &[1, i as u64]));
        for _ in 0..20 {
            let (q, a) = random_q_and_a(&params, &mut rng)?;
            let got = trivial_plus_one_edge_count(&params, &q, &a)?;
            if got != expected {
                bad.push(format!("({n},{k},{r}) Q={q:?} A={a}: counted {got}, formula {expected}"));
                break;
            }
        }
    }
    Ok((bad.is_empty(), format!("5 instances x 20 (Q, A); mismatches: {bad:?}")))
}

/// A uniform `(r-1)`-set `Q` and a uniform k-subset `A` avoiding it.
pub(crate) fn random_q_and_a<R: Rng>(params: &Params, rng: &mut R) -> Result<(Vec<u32>, KSubset)> {
    let (n, k, r) = (params.n(), params.k(), params.r());
    let mut q: Vec<u32> = index::sample(rng, n as usize, (r - 1) as usize).into_iter().map(|x| x as u32 + 1).collect();
    q.sort_unstable();
    let rest: Vec<u32> = (1..=n).filter(|x| !q.contains(x)).collect();
    let mut a: Vec<u32> = index::sample(rng, rest.len(), k as usize).into_iter().map(|i| rest[i]).collect();
    a.sort_unstable();
    Ok((q, KSubset::new(n, &a)?))
}

fn total_edges(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut bad = Vec::new();
    let mut checked = 0;
    for n in 4..=30u32 {
        for k in 2..=n / 2 {
            if small_binomial(n, k) > 30 {
                continue;
            }
            for r in 2..=n / k {
                let params = Params::new(n, k, r)?;
                let all = Family::new(n, k, all_subsets(n, k)?)?;
                let counted = induced_edge_count(&all, r, COUNT_BUDGET)?;
                if crate::Count::from(counted) != total_edge_count(&params) {
                    bad.push(format!("({n},{k},{r})"));
                }
                checked += 1;
            }
        }
    }
    Ok((bad.is_empty(), format!("{checked} instances with C(n,k) <= 30; mismatches: {bad:?}")))
}

fn classical_values(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for (n, k, r, expected) in [(5, 2, 2, 4), (6, 2, 2, 5), (10, 2, 2, 9), (8, 2, 3, 13)] {
        let params = Params::new(n, k, r)?;
        let full = complete(&params)?;
        let solved = max_independent_set(&full, DEFAULT_NODE_BUDGET)?;
        let witnessed = is_independent(&full, &solved.witness) && solved.witness.len() as u64 == expected;
        ok &= solved.alpha == Some(expected) && witnessed;
        detail.push(format!("({n},{k},{r}) alpha={:?}", solved.alpha));
    }
    let emc = emc_oracle(8, 2, 3)?;
    ok &= emc.matches_conjecture && emc.all_maximum_trivial == Some(true);
    let ekr = ekr_oracle(6, 2)?;
    ok &= ekr.matches && ekr.all_maximum_trivial == Some(true);
    detail.push(format!("(8,2,3) maxima={:?} all trivial={:?}", emc.maxima, emc.all_maximum_trivial));
    Ok((ok, detail.join("; ")))
}

/// Largest independent set by trying every vertex subset.
pub(crate) fn exhaustive_alpha(sample: &SampledHypergraph) -> u64 {
    let v = sample.vertex_count() as usize;
    assert!(v <= 24, "exhaustive search is for tiny samples");
    let masks: Vec<u32> =
        sample.retained().iter().map(|e| e.ranks().iter().fold(0u32, |m, &x| m | 1 << x)).collect();
    (0u32..1 << v)
        .filter(|&s| masks.iter().all(|&e| e & s != e))
        .map(|s| u64::from(s.count_ones()))
        .max()
        .unwrap_or(0)
}

fn tiny_samples(count: u64, stream_id: u64) -> Result<Vec<SampledHypergraph>> {
    let shapes = [(6, 2, 2), (6, 2, 3), (5, 2, 2)];
    let ps = [0.2, 0.5, 0.8];
    (0..count)
        .map(|i| {
            let (n, k, r) = shapes[(i % 3) as usize];
            let p = ps[((i / 3) % 3) as usize];
            let kind = if i % 2 == 0 { SamplerKind::Explicit } else { SamplerKind::ByCount };
            sample(&Params::new(n, k, r)?, p, derive_seed(MASTER, &[stream_id, i]), kind)
        })
        .collect()
}

fn solver_vs_exhaustive(opts: &VerifyOptions) -> Result<(bool, String)> {
    let samples = tiny_samples(if opts.fast { 30 } else { 100 }, 2)?;
    let bad: Vec<String> = samples
        .par_iter()
        .map(|s| {
            let solved = max_independent_set(s, DEFAULT_NODE_BUDGET)?;
            let brute = exhaustive_alpha(s);
            Ok((solved.alpha != Some(brute) || !is_independent(s, &solved.witness))
                .then(|| format!("seed {}: solver {:?}, exhaustive {brute}", s.seed, solved.alpha)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok((bad.is_empty(), format!("{} samples; mismatches: {bad:?}", samples.len())))
}

fn duality(opts: &VerifyOptions) -> Result<(bool, String)> {
    let samples = tiny_samples(if opts.fast { 30 } else { 90 }, 3)?;
    let mut bad = Vec::new();
    for s in &samples {
        let v = s.vertex_count();
        let alpha = max_independent_set(s, DEFAULT_NODE_BUDGET)?.alpha;
        let tau = min_hitting_set(s.retained(), v, DEFAULT_NODE_BUDGET)?.size;
        let tau_branching = min_hitting_set_by_branching(s.retained(), v, DEFAULT_NODE_BUDGET)?.size;
        if alpha != Some(v - tau) || tau != tau_branching {
            bad.push(format!("seed {}: alpha {alpha:?}, tau {tau}/{tau_branching}", s.seed));
        }
    }
    Ok((bad.is_empty(), format!("{} samples; alpha = V - tau violations: {bad:?}", samples.len())))
}

fn sampler_equivalence(opts: &VerifyOptions) -> Result<(bool, String)> {
    let params = Params::new(6, 2, 2)?;
    let p = 0.3;
    let seeds = if opts.fast { 500u64 } else { 2000 };
    let edges = 45usize;
    let mut details = Vec::new();
    let mut ok = true;
    for (id, kind) in [(0u64, SamplerKind::Explicit), (1, SamplerKind::ByCount)] {
        let samples: Vec<SampledHypergraph> = (0..seeds)
            .into_par_iter()
            .map(|i| sample(&params, p, derive_seed(MASTER, &[4, id, i]), kind))
            .collect::<Result<_>>()?;
        let index_of = edge_index(&params);
        let mut freq = vec![0u64; edges];
        let mut counts = Vec::with_capacity(samples.len());
        for s in &samples {
            counts.push(s.retained().len() as f64);
            for e in s.retained() {
                freq[index_of(e.ranks())] += 1;
            }
        }
        let sigma = (p * (1.0 - p) / seeds as f64).sqrt();
        let worst = freq.iter().map(|&f| ((f as f64 / seeds as f64) - p).abs() / sigma).fold(0.0, f64::max);
        let (mean, se) = mean_and_se(&counts);
        let z = (mean - 13.5).abs() / se;
        ok &= worst <= 4.0 && z <= 3.0;
        details.push(format!("{kind:?}: worst edge {worst:.2} sigma, count mean {mean:.3} ({z:.2} SE)"));
    }
    Ok((ok, details.join("; ")))
}

/// Maps the rank pair of a `KG^2` edge to `0..|E|`.
fn edge_index(params: &Params) -> impl Fn(&[u32]) -> usize {
    let v = small_binomial(params.n(), params.k()) as usize;
    let members: Vec<u64> = (0..v as u64).map(|i| lex_unrank(params.n(), params.k(), i).expect("rank").bits()).collect();
    let mut table = vec![usize::MAX; v * v];
    let mut next = 0;
    for a in 0..v {
        for b in a + 1..v {
            if members[a] & members[b] == 0 {
                table[a * v + b] = next;
                next += 1;
            }
        }
    }
    move |e: &[u32]| table[e[0] as usize * v + e[1] as usize]
}

pub(crate) fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn expected_y(opts: &VerifyOptions) -> Result<(bool, String)> {
    let params = Params::new(10, 2, 2)?;
    let trials = if opts.fast { 300u64 } else { 1000 };
    let mut ok = true;
    let mut details = Vec::new();
    for (i, p) in [0.05, 0.1, 0.2].into_iter().enumerate() {
        let ys: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let s = sample(&params, p, derive_seed(MASTER, &[5, i as u64, t]), SamplerKind::Explicit)?;
                Ok(y_statistic(&s) as f64)
            })
            .collect::<Result<_>>()?;
        let (mean, se) = mean_and_se(&ys);
        let formula = expected_trivial_plus_one::<f64>(&params, p)?;
        let z = (mean - formula).abs() / se;
        ok &= z <= 3.0;
        details.push(format!("p={p}: mean {mean:.3} vs {formula:.3} ({z:.2} SE)"));
    }
    Ok((ok, details.join("; ")))
}

fn lex_minimality(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut ok = true;
    let mut edges = Vec::new();
    for s in 1..=7 {
        let rep = verify_lex_minimality(6, 2, 2, s)?;
        ok &= rep.exhaustive && rep.min_attained_by_lex;
        edges.push(rep.lex_edges);
    }
    for (n, k, q, m) in [(10, 2, 2, 1), (8, 2, 3, 1), (6, 2, 2, 1)] {
        ok &= check_corollary_on_lex(n, k, q, m)?;
    }
    Ok((ok, format!("(6,2,2) lex edge counts for s=1..7: {edges:?}; corollary bounds hold: {ok}")))
}
