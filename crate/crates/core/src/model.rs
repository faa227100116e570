//! The Kneser hypergraph `KG^r_{n,k}` and its random subhypergraphs.
//!
//! Vertices are identified by lexicographic rank. An edge is the ascending
//! tuple of its members' ranks; among pairwise disjoint sets the rank order
//! coincides with the order of their minimum elements, which is what the
//! enumerators below exploit.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::binomial_sampler::sample_binomial;
use crate::combinatorics::small_binomial;
use crate::error::{Error, Result};
use crate::params::{total_edges_formula, Params};
use crate::rng::{keyed_uniform, stream};
use crate::subset::{all_subsets, lex_unrank, Family, KSubset};
use crate::Count;

/// Largest vertex count the model materializes.
pub const MAX_VERTICES: u64 = 1 << 24;

/// Default cap on edges enumerated by [`sample_explicit`].
pub const EXPLICIT_BUDGET: u64 = 10_000_000;

/// Consecutive duplicate draws tolerated by [`sample_by_count`].
pub const DUPLICATE_CAP: u64 = 10_000;

/// Default node budget for [`induced_edge_count`].
pub const COUNT_BUDGET: u64 = 1_000_000_000;

/// Vertex count `C(n, k)` as a machine word, after checking the model can
/// hold it.
pub fn vertex_count(params: &Params) -> Result<u64> {
    params.require_bitmask()?;
    let v = small_binomial(params.n(), params.k());
    if v > MAX_VERTICES {
        return Err(Error::Budget { what: "vertex table", budget: MAX_VERTICES });
    }
    Ok(v)
}

/// An edge in canonical form: strictly increasing member ranks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Edge(Vec<u32>);

impl Edge {
    /// Canonicalizes a tuple of pairwise disjoint members.
    pub fn from_members(members: &[KSubset]) -> Result<Self> {
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if a.n() != b.n() || a.k() != b.k() {
                    return Err(Error::Mismatch(format!("{a} and {b}")));
                }
                if !a.is_disjoint(b) {
                    return Err(Error::Domain(format!("{a} and {b} intersect")));
                }
            }
        }
        let mut ranks: Vec<u32> = members.iter().map(|m| m.lex_rank() as u32).collect();
        ranks.sort_unstable();
        Ok(Edge(ranks))
    }

    /// Validates ranks against `params`: right arity, strictly increasing,
    /// in range, pairwise disjoint members.
    pub fn from_ranks(params: &Params, ranks: Vec<u32>) -> Result<Self> {
        if ranks.len() != params.r() as usize {
            return Err(Error::Domain(format!(
                "edge has {} members, expected {}",
                ranks.len(),
                params.r()
            )));
        }
        if !ranks.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Domain(format!("edge ranks {ranks:?} not strictly increasing")));
        }
        let mut union = 0u64;
        for &r in &ranks {
            let a = lex_unrank(params.n(), params.k(), u64::from(r))?;
            if union & a.bits() != 0 {
                return Err(Error::Domain(format!("edge {ranks:?} has intersecting members")));
            }
            union |= a.bits();
        }
        Ok(Edge(ranks))
    }

    pub fn ranks(&self) -> &[u32] {
        &self.0
    }

    pub fn contains(&self, rank: u32) -> bool {
        self.0.binary_search(&rank).is_ok()
    }

    pub fn members(&self, params: &Params) -> Vec<KSubset> {
        self.0
            .iter()
            .map(|&r| lex_unrank(params.n(), params.k(), u64::from(r)).expect("validated rank"))
            .collect()
    }
}

/// Calls `f` with every k-subset of the set bits of `mask`, in lex order.
fn for_each_subset_of_mask(mask: u64, size: u32, mut f: impl FnMut(u64)) {
    let elems: Vec<u32> = (0..64).filter(|b| mask & (1u64 << b) != 0).collect();
    let m = elems.len();
    let size = size as usize;
    if size > m {
        return;
    }
    if size == 0 {
        f(0);
        return;
    }
    let mut pos: Vec<usize> = (0..size).collect();
    loop {
        f(pos.iter().fold(0u64, |acc, &p| acc | (1u64 << elems[p])));
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if pos[i] < m - size + i {
                break;
            }
        }
        pos[i] += 1;
        for j in i + 1..size {
            pos[j] = pos[j - 1] + 1;
        }
    }
}

#[inline]
fn above(bit: u32) -> u64 {
    if bit >= 63 {
        0
    } else {
        !0u64 << (bit + 1)
    }
}

/// Enumerates every edge of `KG^r_{n,k}` whose members avoid `forbidden`,
/// in ascending order of rank tuples. Each member after the first has a
/// larger minimum element than its predecessor.
pub(crate) fn for_each_edge_avoiding(
    params: &Params,
    forbidden: u64,
    mut f: impl FnMut(&[u32], &[u64]),
) {
    let (n, k, r) = (params.n(), params.k(), params.r() as usize);
    let ground = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut ranks = Vec::with_capacity(r);
    let mut masks = Vec::with_capacity(r);

    fn rec(
        n: u32,
        k: u32,
        r: usize,
        free: u64,
        min_floor: u64,
        ranks: &mut Vec<u32>,
        masks: &mut Vec<u64>,
        f: &mut dyn FnMut(&[u32], &[u64]),
    ) {
        if ranks.len() == r {
            f(ranks, masks);
            return;
        }
        let still_needed = (r - ranks.len()) as u32 * k;
        let mut cand = free & min_floor;
        while cand != 0 {
            let m = cand.trailing_zeros();
            cand &= cand - 1;
            let rest = free & above(m);
            if rest.count_ones() + 1 < still_needed {
                break;
            }
            for_each_subset_of_mask(rest, k - 1, |tail| {
                let bits = tail | (1u64 << m);
                let a = KSubset::from_bits_unchecked(n, k, bits);
                ranks.push(a.lex_rank() as u32);
                masks.push(bits);
                rec(n, k, r, free & !bits, above(m), ranks, masks, f);
                ranks.pop();
                masks.pop();
            });
        }
    }

    rec(n, k, r, ground & !forbidden, u64::MAX, &mut ranks, &mut masks, &mut f);
}

/// `S_x`: all k-subsets containing `x`, in lex order.
pub fn star(params: &Params, x: u32) -> Result<Family> {
    union_of_stars(params, &[x])
}

fn check_elements(params: &Params, q: &[u32]) -> Result<u64> {
    let mut mask = 0u64;
    for &x in q {
        if x < 1 || x > params.n() {
            return Err(Error::Domain(format!("element {x} outside [1, {}]", params.n())));
        }
        if mask & (1u64 << (x - 1)) != 0 {
            return Err(Error::Domain(format!("element {x} repeated")));
        }
        mask |= 1u64 << (x - 1);
    }
    Ok(mask)
}

fn union_of_stars(params: &Params, q: &[u32]) -> Result<Family> {
    params.require_bitmask()?;
    let mask = check_elements(params, q)?;
    let members = all_subsets(params.n(), params.k())?
        .into_iter()
        .filter(|a| a.bits() & mask != 0)
        .collect();
    Ok(Family::from_sorted_unchecked(params.n(), params.k(), members))
}

/// `S_Q = ∪_{x ∈ Q} S_x` for `|Q| = r - 1`.
pub fn star_union(params: &Params, q: &[u32]) -> Result<Family> {
    if q.len() + 1 != params.r() as usize {
        return Err(Error::Domain(format!(
            "star union needs |Q| = r - 1 = {}, got {}",
            params.r() - 1,
            q.len()
        )));
    }
    union_of_stars(params, q)
}

/// Number of `r`-subsets of `family` whose members are pairwise disjoint.
///
/// Backtracks over members in lex order with a running union mask. The
/// count is exact; exceeding `budget` search nodes is an error.
pub fn induced_edge_count(family: &Family, r: u32, budget: u64) -> Result<u64> {
    if r < 2 {
        return Err(Error::InvalidParams(format!("edge arity {r} < 2")));
    }
    let masks: Vec<u64> = family.iter().map(KSubset::bits).collect();
    let mut nodes = 0u64;
    let mut count = 0u64;

    fn rec(
        masks: &[u64],
        start: usize,
        union: u64,
        left: u32,
        nodes: &mut u64,
        budget: u64,
        count: &mut u64,
    ) -> bool {
        for i in start..masks.len() {
            if masks[i] & union != 0 {
                continue;
            }
            *nodes += 1;
            if *nodes > budget {
                return false;
            }
            if left == 1 {
                *count += 1;
            } else if !rec(masks, i + 1, union | masks[i], left - 1, nodes, budget, count) {
                return false;
            }
        }
        true
    }

    if rec(&masks, 0, 0, r, &mut nodes, budget, &mut count) {
        Ok(count)
    } else {
        Err(Error::Budget { what: "induced edge count", budget })
    }
}

/// Edges of `KG^r` inside `S_Q ∪ {A}`, counted by brute force.
pub fn trivial_plus_one_edge_count(params: &Params, q: &[u32], a: &KSubset) -> Result<u64> {
    let s_q = star_union(params, q)?;
    if a.n() != params.n() || a.k() != params.k() {
        return Err(Error::Mismatch(format!("{a} does not belong to the ({}, {}) universe", params.n(), params.k())));
    }
    if s_q.contains(a) {
        return Err(Error::Domain(format!("{a} already lies in S_Q")));
    }
    let family = s_q.with_member(*a)?;
    induced_edge_count(&family, params.r(), COUNT_BUDGET)
}

/// `|E(KG^r_{n,k})|` from the closed form.
pub fn total_edge_count(params: &Params) -> Count {
    total_edges_formula(params.n(), params.k(), params.r()).expect("BigUint cannot overflow")
}

/// One edge drawn uniformly from `E(KG^r_{n,k})`.
///
/// Members are drawn one after another, each uniform among the k-subsets
/// of the still unused elements; the number of completions of an
/// `i`-member prefix depends only on `i`, so the unordered result is
/// uniform.
pub fn sample_uniform_edge<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Result<Edge> {
    params.require_bitmask()?;
    let (n, k, r) = (params.n(), params.k(), params.r());
    if n < r * k {
        return Err(Error::Domain(format!("KG^{r}_{{{n},{k}}} has no edges (n < rk)")));
    }
    let mut free: Vec<u32> = (0..n).collect();
    let mut ranks = Vec::with_capacity(r as usize);
    for _ in 0..r {
        let picks = index::sample(rng, free.len(), k as usize).into_vec();
        let bits = picks.iter().fold(0u64, |m, &i| m | (1u64 << free[i]));
        ranks.push(KSubset::from_bits_unchecked(n, k, bits).lex_rank() as u32);
        free.retain(|e| bits & (1u64 << e) == 0);
    }
    ranks.sort_unstable();
    Ok(Edge(ranks))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Explicit,
    ByCount,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(SamplerKind::Explicit),
            "by-count" | "by_count" => Ok(SamplerKind::ByCount),
            other => Err(Error::Domain(format!("unknown sampler '{other}'"))),
        }
    }
}

/// A realization of `KG^r_{n,k}(p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleRepr")]
pub struct SampledHypergraph {
    pub params: Params,
    pub p: f64,
    pub seed: u64,
    pub sampler_kind: SamplerKind,
    retained: Vec<Edge>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRepr {
    params: Params,
    p: f64,
    seed: u64,
    sampler_kind: SamplerKind,
    retained: Vec<Vec<u32>>,
}

impl TryFrom<SampleRepr> for SampledHypergraph {
    type Error = Error;

    fn try_from(s: SampleRepr) -> Result<Self> {
        if !(0.0..=1.0).contains(&s.p) {
            return Err(Error::Domain(format!("probability {} outside [0, 1]", s.p)));
        }
        let v = vertex_count(&s.params)?;
        let mut retained = Vec::with_capacity(s.retained.len());
        for ranks in s.retained {
            if let Some(&bad) = ranks.iter().find(|&&r| u64::from(r) >= v) {
                return Err(Error::OutOfRange { index: u64::from(bad), size: v });
            }
            retained.push(Edge::from_ranks(&s.params, ranks)?);
        }
        SampledHypergraph::from_edges(s.params, s.p, s.seed, s.sampler_kind, retained)
    }
}

impl SampledHypergraph {
    /// Builds a sample from an explicit edge list (sorted here; duplicates
    /// rejected).
    pub fn from_edges(
        params: Params,
        p: f64,
        seed: u64,
        sampler_kind: SamplerKind,
        mut retained: Vec<Edge>,
    ) -> Result<Self> {
        retained.sort_unstable();
        if let Some(w) = retained.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("duplicate edge {:?}", w[0].ranks())));
        }
        Ok(SampledHypergraph { params, p, seed, sampler_kind, retained })
    }

    pub fn retained(&self) -> &[Edge] {
        &self.retained
    }

    pub fn vertex_count(&self) -> u64 {
        small_binomial(self.params.n(), self.params.k())
    }

    pub fn regenerate(&self) -> Result<SampledHypergraph> {
        sample(&self.params, self.p, self.seed, self.sampler_kind)
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside [0, 1]")))
    }
}

pub fn sample(params: &Params, p: f64, seed: u64, kind: SamplerKind) -> Result<SampledHypergraph> {
    match kind {
        SamplerKind::Explicit => sample_explicit(params, p, seed),
        SamplerKind::ByCount => sample_by_count(params, p, seed),
    }
}

/// Whether an edge is kept at probability `p` under master seed `seed`.
/// The uniform depends only on `(seed, edge)`, so samples at different `p`
/// with one seed are nested.
#[inline]
pub fn explicit_retains(seed: u64, ranks: &[u32], p: f64) -> bool {
    keyed_uniform(seed, ranks) < p
}

/// Enumerates every edge and keeps each with its own keyed Bernoulli(p).
pub fn sample_explicit(params: &Params, p: f64, seed: u64) -> Result<SampledHypergraph> {
    sample_explicit_with_budget(params, p, seed, EXPLICIT_BUDGET)
}

pub fn sample_explicit_with_budget(
    params: &Params,
    p: f64,
    seed: u64,
    budget: u64,
) -> Result<SampledHypergraph> {
    check_p(p)?;
    vertex_count(params)?;
    if total_edge_count(params) > Count::from(budget) {
        return Err(Error::Budget { what: "explicit sampler (use the by-count sampler)", budget });
    }
    let mut retained = Vec::new();
    for_each_edge_avoiding(params, 0, |ranks, _| {
        if explicit_retains(seed, ranks, p) {
            retained.push(Edge(ranks.to_vec()));
        }
    });
    Ok(SampledHypergraph { params: *params, p, seed, sampler_kind: SamplerKind::Explicit, retained })
}

/// Draws `m ~ Binomial(|E|, p)`, then `m` distinct uniform edges.
///
/// Distinct edges come from duplicate rejection while `m <= |E| / 2`;
/// above that the `|E| - m` dropped edges are chosen instead, from the
/// enumerated edge list.
pub fn sample_by_count(params: &Params, p: f64, seed: u64) -> Result<SampledHypergraph> {
    check_p(p)?;
    vertex_count(params)?;
    let total = total_edge_count(params);
    let total: u64 = num_traits::ToPrimitive::to_u64(&total)
        .ok_or(Error::Budget { what: "edge count", budget: u64::MAX })?;
    let mut rng = stream(seed);
    let m = sample_binomial(&mut rng, total, p);

    let mut retained = if m > total / 2 && total <= EXPLICIT_BUDGET {
        let mut all = Vec::with_capacity(total as usize);
        for_each_edge_avoiding(params, 0, |ranks, _| all.push(Edge(ranks.to_vec())));
        let mut keep = vec![true; all.len()];
        for i in index::sample(&mut rng, all.len(), (total - m) as usize) {
            keep[i] = false;
        }
        all.into_iter().zip(keep).filter_map(|(e, k)| k.then_some(e)).collect()
    } else {
        let mut seen = HashSet::with_capacity(m as usize);
        let mut out = Vec::with_capacity(m as usize);
        let mut streak = 0u64;
        while (out.len() as u64) < m {
            let e = sample_uniform_edge(params, &mut rng)?;
            if seen.insert(e.clone()) {
                out.push(e);
                streak = 0;
            } else {
                streak += 1;
                if streak >= DUPLICATE_CAP {
                    return Err(Error::DuplicateCap(streak));
                }
            }
        }
        out
    };
    retained.sort_unstable();
    Ok(SampledHypergraph { params: *params, p, seed, sampler_kind: SamplerKind::ByCount, retained })
}

/// Retained edges whose members all lie in `family`.
pub fn retained_edges_within(sample: &SampledHypergraph, family: &Family) -> Vec<Edge> {
    if family.n() != sample.params.n() || family.k() != sample.params.k() {
        return Vec::new();
    }
    let v = sample.vertex_count() as usize;
    let mut inside = vec![false; v];
    for a in family {
        inside[a.lex_rank() as usize] = true;
    }
    sample
        .retained
        .iter()
        .filter(|e| e.0.iter().all(|&r| inside[r as usize]))
        .cloned()
        .collect()
}

/// Every edge of the full hypergraph, i.e. the sample at `p = 1`.
pub fn complete(params: &Params) -> Result<SampledHypergraph> {
    sample_explicit(params, 1.0, 0)
}
