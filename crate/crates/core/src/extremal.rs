//! Lexicographic initial families, exhaustive checks that they minimize
//! induced edge counts, and the classical extremal values at `p = 1`.

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{small_binomial, try_binomial};
use crate::error::{Error, Result};
use crate::model::{complete, for_each_edge_avoiding, induced_edge_count, COUNT_BUDGET};
use crate::params::{emc_value, star_product, EmcBranch, Params};
use crate::rng::{derive_seed, stream};
use crate::solver::{all_maximum_independent_sets, is_trivial_union, max_independent_set, DEFAULT_NODE_BUDGET};
use crate::subset::Family;

/// Families checked by [`verify_lex_minimality`] before it switches to
/// sampling.
pub const DEFAULT_FAMILY_BUDGET: u64 = 10_000_000;

/// Random families drawn when the exhaustive check is over budget.
pub const SAMPLED_FAMILIES: u64 = 100_000;

/// Maximum independent sets listed before an oracle gives up on the
/// triviality verdict.
pub const MAXIMA_CAP: usize = 10_000;

/// `L_{n,k}(s)`: the first `s` k-subsets of `[n]` in lex order.
pub fn lex_initial_family(n: u32, k: u32, s: u64) -> Result<Family> {
    let total = try_binomial::<u64>(u64::from(n), u64::from(k))
        .ok_or(Error::Overflow("C(n,k)"))?;
    if s < 1 || s > total {
        return Err(Error::OutOfRange { index: s, size: total + 1 });
    }
    Family::from_ranks(n, k, 0..s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinimalityReport {
    pub n: u32,
    pub k: u32,
    pub r: u32,
    pub s: u64,
    pub lex_edges: u64,
    pub min_edges: u64,
    pub min_attained_by_lex: bool,
    pub families_enumerated: u64,
    /// False when the family count was over budget and `min_edges` is the
    /// minimum over a random sample.
    pub exhaustive: bool,
    /// Smallest `l` with `s <= C(n,k) - C(n-l,k)`.
    pub l: u32,
    /// Whether `n > 108 k^2 (l + k)`, the range where lex families are known
    /// to be optimal for graphs. `None` for `r >= 3`, whose constant is not
    /// explicit.
    pub hypothesis_holds: Option<bool>,
}

/// Edges of the full hypergraph grouped by their largest member: entry `v`
/// lists, for every edge whose largest rank is `v`, the other ranks.
fn edges_by_top(params: &Params) -> Vec<Vec<Vec<u32>>> {
    let v = small_binomial(params.n(), params.k()) as usize;
    let mut out = vec![Vec::new(); v];
    for_each_edge_avoiding(params, 0, |ranks, _| {
        let mut e = ranks.to_vec();
        e.sort_unstable();
        let top = e.pop().expect("edges are nonempty");
        out[top as usize].push(e);
    });
    out
}

struct Counter<'a> {
    below: &'a [Vec<Vec<u32>>],
    inside: Vec<bool>,
    size: usize,
    min: u64,
    families: u64,
}

impl Counter<'_> {
    fn added(&self, v: usize) -> u64 {
        self.below[v].iter().filter(|e| e.iter().all(|&u| self.inside[u as usize])).count() as u64
    }

    fn walk(&mut self, start: usize, left: usize, edges: u64) {
        if left == 0 {
            self.families += 1;
            self.min = self.min.min(edges);
            return;
        }
        for v in start..=self.size - left {
            let e = edges + self.added(v);
            if e >= self.min {
                // Edge counts only grow along a branch, so none of its
                // families can go below the current minimum.
                self.families += try_binomial::<u64>((self.size - v - 1) as u64, (left - 1) as u64)
                    .expect("bounded by the family budget");
                continue;
            }
            self.inside[v] = true;
            self.walk(v + 1, left - 1, e);
            self.inside[v] = false;
        }
    }
}

/// Edge count of the family with the given sorted ranks.
fn family_edges(below: &[Vec<Vec<u32>>], ranks: &[usize]) -> u64 {
    let mut inside = vec![false; below.len()];
    let mut total = 0;
    for &v in ranks {
        total += below[v].iter().filter(|e| e.iter().all(|&u| inside[u as usize])).count() as u64;
        inside[v] = true;
    }
    total
}

/// [`verify_lex_minimality_with_budget`] at the default budget.
pub fn verify_lex_minimality(n: u32, k: u32, r: u32, s: u64) -> Result<MinimalityReport> {
    verify_lex_minimality_with_budget(n, k, r, s, DEFAULT_FAMILY_BUDGET)
}

/// Compares the edge count of `L_{n,k}(s)` in `KG^r_{n,k}` with the minimum
/// over all `s`-families. Enumerates every family when there are at most
/// `budget` of them; otherwise samples random families.
pub fn verify_lex_minimality_with_budget(
    n: u32,
    k: u32,
    r: u32,
    s: u64,
    budget: u64,
) -> Result<MinimalityReport> {
    let params = Params::new(n, k, r)?;
    params.require_bitmask()?;
    let lex = lex_initial_family(n, k, s)?;
    let lex_edges = induced_edge_count(&lex, r, COUNT_BUDGET)?;
    let v = small_binomial(n, k) as usize;
    let below = edges_by_top(&params);
    let s_usize = s as usize;

    let families = try_binomial::<u64>(v as u64, s);
    let exhaustive = families.is_some_and(|f| f <= budget);
    let (min_edges, families_enumerated) = if exhaustive {
        // Split on the smallest member; each branch is an independent walk.
        let parts: Vec<(u64, u64)> = (0..=v - s_usize)
            .into_par_iter()
            .map(|first| {
                let mut c = Counter {
                    below: &below,
                    inside: vec![false; v],
                    size: v,
                    min: lex_edges,
                    families: 0,
                };
                c.inside[first] = true;
                c.walk(first + 1, s_usize - 1, 0);
                (c.min, c.families)
            })
            .collect();
        parts.iter().fold((lex_edges, 0), |(m, f), &(pm, pf)| (m.min(pm), f + pf))
    } else {
        let mut rng = stream(derive_seed(0x1E7, &[n.into(), k.into(), r.into(), s]));
        let draws = budget.min(SAMPLED_FAMILIES);
        let mut min = lex_edges;
        for _ in 0..draws {
            let mut ranks = index::sample(&mut rng, v, s_usize).into_vec();
            ranks.sort_unstable();
            min = min.min(family_edges(&below, &ranks));
        }
        (min, draws)
    };

    let l = (1..=n)
        .find(|&l| s <= small_binomial(n, k) - small_binomial(n - l, k))
        .expect("l = n covers every s");
    let hypothesis_holds = (r == 2).then(|| u64::from(n) > 108 * u64::from(k * k) * u64::from(l + k));
    Ok(MinimalityReport {
        n,
        k,
        r,
        s,
        lex_edges,
        min_edges,
        min_attained_by_lex: lex_edges == min_edges,
        families_enumerated,
        exhaustive,
        l,
        hypothesis_holds,
    })
}

/// `m Π_{i=1}^{q-1} C(n - ik - q + i, k - 1)`: the edges that `q - 1` full
/// stars and `m` members of the next star are forced to span.
pub fn corollary_lower_bound(n: u32, k: u32, q: u32, m: u64) -> Result<u64> {
    if q < 2 {
        return Err(Error::InvalidParams(format!("need q >= 2, got {q}")));
    }
    let n_q = next_star_size(n, k, q)?;
    if m < 1 || m > n_q {
        return Err(Error::OutOfRange { index: m, size: n_q + 1 });
    }
    let product: u64 = star_product(n, k, q)?;
    product.checked_mul(m).ok_or(Error::Overflow("corollary bound"))
}

/// `N_q = C(n - q, k - 1)`, the members of `S_q` outside `S_1 ∪ … ∪ S_{q-1}`.
fn next_star_size(n: u32, k: u32, q: u32) -> Result<u64> {
    if q >= n {
        return Err(Error::InvalidParams(format!("q = {q} must be below n = {n}")));
    }
    Ok(small_binomial(n - q, k - 1))
}

/// Whether `L_{n,k}(s)` with `s = N_1 + … + N_{q-1} + m` spans at least
/// [`corollary_lower_bound`] edges of `KG^q_{n,k}`.
pub fn check_corollary_on_lex(n: u32, k: u32, q: u32, m: u64) -> Result<bool> {
    let bound = corollary_lower_bound(n, k, q, m)?;
    let s = (1..q).map(|i| small_binomial(n - i, k - 1)).sum::<u64>() + m;
    let lex = lex_initial_family(n, k, s)?;
    Ok(induced_edge_count(&lex, q, COUNT_BUDGET)? >= bound)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EkrReport {
    pub n: u32,
    pub k: u32,
    pub alpha: u64,
    /// `C(n-1, k-1)`
    pub star_size: u64,
    pub matches: bool,
    /// Number of maximum independent sets, if at most [`MAXIMA_CAP`].
    pub maxima: Option<u64>,
    /// Whether every maximum independent set is a star; `None` past the cap.
    pub all_maximum_trivial: Option<bool>,
}

/// Independence number of `KG_{n,k}` and whether its maxima are all stars.
pub fn ekr_oracle(n: u32, k: u32) -> Result<EkrReport> {
    let params = Params::new(n, k, 2)?;
    let (alpha, maxima, trivial) = maxima_at_p_one(&params, true)?;
    let star_size = small_binomial(n - 1, k - 1);
    Ok(EkrReport { n, k, alpha, star_size, matches: alpha == star_size, maxima, all_maximum_trivial: trivial })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmcReport {
    pub n: u32,
    pub k: u32,
    pub r: u32,
    pub alpha: u64,
    /// `max{C(rk-1, k), C(n,k) - C(n-r+1,k)}`
    pub conjectured: u64,
    pub branch: EmcBranch,
    pub matches_conjecture: bool,
    /// `n >= (2r-1)k - r + 1`, where the value is a theorem.
    pub frankl_regime: bool,
    /// Below that bound: the comparison tests the conjecture itself.
    pub conjecture_regime: bool,
    pub maxima: Option<u64>,
    /// Only decided inside the Frankl regime.
    pub all_maximum_trivial: Option<bool>,
}

/// Independence number of `KG^r_{n,k}` against the matching conjecture
/// value, with the maxima checked for being star unions in the Frankl
/// regime.
pub fn emc_oracle(n: u32, k: u32, r: u32) -> Result<EmcReport> {
    let params = Params::new(n, k, r)?;
    let conj = emc_value::<u64>(&params)?;
    let (alpha, maxima, trivial) = maxima_at_p_one(&params, params.frankl_regime())?;
    Ok(EmcReport {
        n,
        k,
        r,
        alpha,
        conjectured: conj.value,
        branch: conj.branch,
        matches_conjecture: alpha == conj.value,
        frankl_regime: params.frankl_regime(),
        conjecture_regime: !params.frankl_regime(),
        maxima,
        all_maximum_trivial: trivial,
    })
}

fn maxima_at_p_one(params: &Params, enumerate: bool) -> Result<(u64, Option<u64>, Option<bool>)> {
    let full = complete(params)?;
    let solved = max_independent_set(&full, DEFAULT_NODE_BUDGET)?;
    let alpha = solved.alpha.ok_or(Error::Budget { what: "search nodes", budget: DEFAULT_NODE_BUDGET })?;
    if !enumerate {
        return Ok((alpha, None, None));
    }
    match all_maximum_independent_sets(&full, MAXIMA_CAP, DEFAULT_NODE_BUDGET) {
        Ok(all) => {
            let trivial = all.iter().all(|f| is_trivial_union(f, params).is_some());
            Ok((alpha, Some(all.len() as u64), Some(trivial)))
        }
        Err(Error::Budget { .. }) => Ok((alpha, None, None)),
        Err(e) => Err(e),
    }
}
