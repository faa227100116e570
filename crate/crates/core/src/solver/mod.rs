//! Exact independence numbers of sampled Kneser hypergraphs, trivial-family
//! detection and the star-concentration classifier.
//!
//! Graphs (`r = 2`) go through a bitset maximum-clique search on the
//! complement. Hypergraphs go through exact minimum hitting sets, using
//! that a vertex set is independent iff its complement meets every edge.

mod clique;
mod heuristic;
mod hitting;

use std::ops::ControlFlow;

use serde::{Serialize, Serializer};

use crate::combinatorics::{small_binomial, try_binomial};
use crate::error::{Error, Result};
use crate::model::{star_union, Edge, SampledHypergraph};
use crate::params::{trivial_size, Params};
use crate::subset::{lex_unrank, Family, KSubset};

use clique::{BudgetHit, GraphSearch};
use hitting::HittingSearch;

/// Default node budget for the search routines.
pub const DEFAULT_NODE_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Exact,
    BudgetExceeded,
}

/// Outcome of [`max_independent_set`]. With `BudgetExceeded` the alpha is
/// absent and the witness is the best independent set seen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub alpha: Option<u64>,
    #[serde(serialize_with = "serialize_ranks")]
    pub witness: Family,
    pub nodes_explored: u64,
    pub status: SolveStatus,
}

fn serialize_ranks<S: Serializer>(family: &Family, s: S) -> std::result::Result<S::Ok, S::Error> {
    family.ranks().serialize(s)
}

/// A minimum hitting set as vertex ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HittingSet {
    pub size: u64,
    pub witness: Vec<u32>,
    pub nodes_explored: u64,
}

/// Three-valued answer for searches that may run out of budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Yes,
    No,
    Unknown,
}

impl Decision {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Decision::Yes => Some(true),
            Decision::No => Some(false),
            Decision::Unknown => None,
        }
    }
}

fn budget_error(budget: u64) -> Error {
    Error::Budget { what: "search nodes", budget }
}

/// Whether `family` contains no retained edge.
pub fn is_independent(sample: &SampledHypergraph, family: &Family) -> bool {
    if family.n() != sample.params.n() || family.k() != sample.params.k() {
        return false;
    }
    let mut inside = vec![false; sample.vertex_count() as usize];
    for a in family {
        inside[a.lex_rank() as usize] = true;
    }
    ranks_independent(sample.retained(), &inside)
}

fn ranks_independent(edges: &[Edge], inside: &[bool]) -> bool {
    !edges.iter().any(|e| e.ranks().iter().all(|&v| inside[v as usize]))
}

/// Vertices that lie in some edge, and the edges relabelled onto them.
struct Compressed {
    touched: Vec<u32>,
    edges: Vec<Vec<u32>>,
}

fn compress(edges: &[Edge], vertex_count: usize) -> Compressed {
    let mut index = vec![u32::MAX; vertex_count];
    let mut touched = Vec::new();
    for e in edges {
        for &v in e.ranks() {
            index[v as usize] = 0;
        }
    }
    for (v, slot) in index.iter_mut().enumerate() {
        if *slot == 0 {
            *slot = touched.len() as u32;
            touched.push(v as u32);
        }
    }
    let edges = edges
        .iter()
        .map(|e| e.ranks().iter().map(|&v| index[v as usize]).collect())
        .collect();
    Compressed { touched, edges }
}

fn all_pairs(edges: &[Vec<u32>]) -> Option<Vec<(u32, u32)>> {
    edges
        .iter()
        .map(|e| match e[..] {
            [a, b] => Some((a, b)),
            _ => None,
        })
        .collect()
}

/// Exact minimum hitting set of `edges` over vertices `0..vertex_count`.
///
/// Graph edge lists are solved as vertex covers through the clique engine;
/// anything else uses edge branching.
pub fn min_hitting_set(edges: &[Edge], vertex_count: u64, budget: u64) -> Result<HittingSet> {
    check_edges(edges, vertex_count)?;
    let c = compress(edges, vertex_count as usize);
    if let Some(pairs) = all_pairs(&c.edges) {
        let mut search = GraphSearch::new(c.touched.len(), &pairs, budget);
        let best = search.maximize(0).map_err(|_| budget_error(budget))?.unwrap_or_default();
        let mut keep = vec![false; c.touched.len()];
        for &i in &best {
            keep[i as usize] = true;
        }
        let witness: Vec<u32> =
            (0..c.touched.len()).filter(|&i| !keep[i]).map(|i| c.touched[i]).collect();
        return Ok(HittingSet { size: witness.len() as u64, witness, nodes_explored: search.nodes() });
    }
    min_hitting_set_by_branching(edges, vertex_count, budget)
}

/// [`min_hitting_set`] forced through the edge-branching engine, for any
/// edge sizes.
pub fn min_hitting_set_by_branching(
    edges: &[Edge],
    vertex_count: u64,
    budget: u64,
) -> Result<HittingSet> {
    check_edges(edges, vertex_count)?;
    let c = compress(edges, vertex_count as usize);
    let touched = c.touched.len();
    let mut search = HittingSearch::new(touched, c.edges, budget);
    let best = search
        .minimize(touched + 1)
        .map_err(|_| budget_error(budget))?
        .expect("the touched vertices always hit every edge");
    let witness: Vec<u32> = best.iter().map(|&i| c.touched[i as usize]).collect();
    Ok(HittingSet { size: witness.len() as u64, witness, nodes_explored: search.nodes })
}

fn check_edges(edges: &[Edge], vertex_count: u64) -> Result<()> {
    if vertex_count > u64::from(u32::MAX) {
        return Err(Error::InvalidParams(format!("{vertex_count} vertices")));
    }
    for e in edges {
        if e.ranks().is_empty() {
            return Err(Error::Domain("empty edge cannot be hit".into()));
        }
        if let Some(&v) = e.ranks().iter().find(|&&v| u64::from(v) >= vertex_count) {
            return Err(Error::OutOfRange { index: u64::from(v), size: vertex_count });
        }
    }
    Ok(())
}

/// Ranks of the star union over `{1, …, r−1}`, independent in every sample.
fn seed_ranks(params: &Params) -> Result<Vec<u32>> {
    let q: Vec<u32> = (1..params.r()).collect();
    Ok(star_union(params, &q)?.ranks().into_iter().map(|r| r as u32).collect())
}

fn family_from_ranks(params: &Params, ranks: impl IntoIterator<Item = u32>) -> Result<Family> {
    Family::from_ranks(params.n(), params.k(), ranks.into_iter().map(u64::from))
}

fn complement(vertex_count: usize, removed: &[u32]) -> Vec<u32> {
    let mut out = vec![true; vertex_count];
    for &v in removed {
        out[v as usize] = false;
    }
    (0..vertex_count as u32).filter(|&v| out[v as usize]).collect()
}

/// Exact independence number with a maximum independent set.
pub fn max_independent_set(sample: &SampledHypergraph, budget: u64) -> Result<SolveResult> {
    let params = sample.params;
    let v = sample.vertex_count() as usize;
    if sample.retained().is_empty() {
        return Ok(SolveResult {
            alpha: Some(v as u64),
            witness: family_from_ranks(&params, 0..v as u32)?,
            nodes_explored: 0,
            status: SolveStatus::Exact,
        });
    }
    let seed = seed_ranks(&params)?;
    let c = compress(sample.retained(), v);
    let untouched = v - c.touched.len();

    let (found, nodes) = if let Some(pairs) = all_pairs(&c.edges) {
        // The seed has N vertices; only strictly larger sets are searched.
        let mut search = GraphSearch::new(c.touched.len(), &pairs, budget);
        let lower = seed.len().saturating_sub(untouched);
        let r = search.maximize(lower).map(|best| {
            best.map(|b| {
                let mut keep = vec![false; v];
                for &i in &b {
                    keep[c.touched[i as usize] as usize] = true;
                }
                for (i, slot) in keep.iter_mut().enumerate() {
                    if c.touched.binary_search(&(i as u32)).is_err() {
                        *slot = true;
                    }
                }
                (0..v as u32).filter(|&i| keep[i as usize]).collect::<Vec<u32>>()
            })
        });
        (r, search.nodes())
    } else {
        let touched = c.touched.len();
        let mut search = HittingSearch::new(touched, c.edges, budget);
        let upper = v - seed.len();
        let r = search.minimize(upper.min(touched + 1)).map(|best| {
            best.map(|h| {
                let h: Vec<u32> = h.iter().map(|&i| c.touched[i as usize]).collect();
                complement(v, &h)
            })
        });
        (r, search.nodes)
    };

    match found {
        Ok(best) => {
            let ranks = best.unwrap_or(seed);
            Ok(SolveResult {
                alpha: Some(ranks.len() as u64),
                witness: family_from_ranks(&params, ranks)?,
                nodes_explored: nodes,
                status: SolveStatus::Exact,
            })
        }
        Err(BudgetHit) => Ok(SolveResult {
            alpha: None,
            witness: family_from_ranks(&params, seed)?,
            nodes_explored: nodes,
            status: SolveStatus::BudgetExceeded,
        }),
    }
}

/// Whether the sample has an independent set of `t` vertices. Stops at the
/// first witness.
pub fn exists_independent_of_size(sample: &SampledHypergraph, t: u64, budget: u64) -> Result<bool> {
    find_independent_of_size(sample, t, budget).map(|q| q.witness.is_some())
}

/// Answer of [`find_independent_of_size`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeQuery {
    pub witness: Option<Family>,
    pub nodes_explored: u64,
}

/// An independent set of exactly `t` vertices, if any.
pub fn find_independent_of_size(
    sample: &SampledHypergraph,
    t: u64,
    budget: u64,
) -> Result<SizeQuery> {
    let params = sample.params;
    let v = sample.vertex_count();
    if t > v {
        return Err(Error::OutOfRange { index: t, size: v + 1 });
    }
    let t = t as usize;
    let v = v as usize;
    let done = |ranks: Vec<u32>, nodes| {
        Ok(SizeQuery { witness: Some(family_from_ranks(&params, ranks)?), nodes_explored: nodes })
    };
    let mut seed = seed_ranks(&params)?;
    if t <= seed.len() {
        seed.truncate(t);
        return done(seed, 0);
    }
    if let Some(mut w) = heuristic::star_neighbourhood_witness(sample, t) {
        w.truncate(t);
        let mut inside = vec![false; v];
        for &i in &w {
            inside[i as usize] = true;
        }
        if ranks_independent(sample.retained(), &inside) {
            return done(w, 0);
        }
    }
    let c = compress(sample.retained(), v);
    let mut untouched: Vec<u32> = complement(v, &c.touched);
    if t <= untouched.len() {
        untouched.truncate(t);
        return done(untouched, 0);
    }
    let need = t - untouched.len();

    let (found, nodes) = if let Some(pairs) = all_pairs(&c.edges) {
        let mut search = GraphSearch::new(c.touched.len(), &pairs, budget);
        let found = search
            .find_at_least(need)
            .map(|b| b.map(|b| b.iter().map(|&i| c.touched[i as usize]).collect::<Vec<u32>>()));
        (found, search.nodes())
    } else {
        let touched = c.touched.len();
        let mut search = HittingSearch::new(touched, c.edges, budget);
        let found = search.find_at_most(touched - need).map(|h| {
            h.map(|h| {
                let h: Vec<u32> = h.iter().map(|&i| c.touched[i as usize]).collect();
                complement(v, &h).into_iter().filter(|x| c.touched.binary_search(x).is_ok()).collect()
            })
        });
        (found, search.nodes)
    };
    match found {
        Ok(Some(mut inside)) => {
            inside.truncate(need);
            inside.extend(untouched);
            done(inside, nodes)
        }
        Ok(None) => Ok(SizeQuery { witness: None, nodes_explored: nodes }),
        Err(BudgetHit) => Err(budget_error(budget)),
    }
}

/// The set `Q` of `r − 1` elements with `family = S_Q`, if there is one.
/// The smallest such `Q` is returned.
pub fn is_trivial_union(family: &Family, params: &Params) -> Option<Vec<u32>> {
    if family.n() != params.n() || family.k() != params.k() {
        return None;
    }
    let n_trivial = trivial_size::<u64>(params.n(), params.k(), params.r()).ok()?;
    if family.len() as u64 != n_trivial {
        return None;
    }
    let full_star = small_binomial(params.n() - 1, params.k() - 1);
    let counts = element_counts(family);
    let collector: Vec<u32> = (1..=params.n()).filter(|&x| counts[x as usize] == full_star).collect();
    // The collected stars lie inside the family, and a union of r−1 of them
    // already has the family's size.
    (collector.len() >= (params.r() - 1) as usize)
        .then(|| collector[..(params.r() - 1) as usize].to_vec())
}

/// `counts[x] = |{A ∈ family : x ∈ A}|`, indexed from 1.
fn element_counts(family: &Family) -> Vec<u64> {
    let mut counts = vec![0u64; family.n() as usize + 1];
    for a in family {
        for x in a.elements() {
            counts[x as usize] += 1;
        }
    }
    counts
}

/// Whether some independent set of `t` vertices is not a union of `r − 1`
/// stars. `Unknown` when the budget runs out first.
pub fn exists_nontrivial_independent_of_size(
    sample: &SampledHypergraph,
    t: u64,
    budget: u64,
) -> Decision {
    let params = sample.params;
    let Ok(n_trivial) = trivial_size::<u64>(params.n(), params.k(), params.r()) else {
        return Decision::Unknown;
    };
    if t != n_trivial {
        // Star unions have exactly N members, so every other size is
        // nontrivial as soon as it exists.
        return match exists_independent_of_size(sample, t, budget) {
            Ok(true) => Decision::Yes,
            Ok(false) => Decision::No,
            Err(Error::OutOfRange { .. }) => Decision::No,
            Err(_) => Decision::Unknown,
        };
    }
    let v = sample.vertex_count() as usize;
    let t = t as usize;
    let mut nontrivial = false;

    let walk = if sample.params.r() == 2 {
        let pairs: Vec<(u32, u32)> =
            sample.retained().iter().map(|e| (e.ranks()[0], e.ranks()[1])).collect();
        let mut search = GraphSearch::new(v, &pairs, budget);
        search.for_each_of_size(t, |set| {
            let trivial = family_from_ranks(&params, set.iter().copied())
                .map(|f| is_trivial_union(&f, &params).is_some())
                .unwrap_or(true);
            if trivial {
                ControlFlow::Continue(())
            } else {
                nontrivial = true;
                ControlFlow::Break(())
            }
        })
    } else {
        let c = compress(sample.retained(), v);
        let untouched = v - c.touched.len();
        let touched = c.touched.len();
        let Some(limit) = (touched + untouched).checked_sub(t) else {
            return Decision::No;
        };
        let mut search = HittingSearch::new(touched, c.edges, budget);
        let members: Vec<KSubset> = (0..v as u64)
            .map(|r| lex_unrank(params.n(), params.k(), r).expect("rank below C(n,k)"))
            .collect();
        search.for_each_leaf(limit.min(touched), &mut |h| {
            let h: Vec<u32> = h.iter().map(|&i| c.touched[i as usize]).collect();
            let inside = complement(v, &h);
            if leaf_has_nontrivial(&params, &members, &inside, t) {
                nontrivial = true;
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
    };
    match walk {
        Ok(_) if nontrivial => Decision::Yes,
        Ok(_) => Decision::No,
        Err(BudgetHit) => Decision::Unknown,
    }
}

/// Whether the independent set `inside` has a `t`-subset that is not a
/// star union, i.e. more `t`-subsets than star unions it contains.
fn leaf_has_nontrivial(params: &Params, members: &[KSubset], inside: &[u32], t: usize) -> bool {
    let full_star = small_binomial(params.n() - 1, params.k() - 1);
    let mut counts = vec![0u64; params.n() as usize + 1];
    for &v in inside {
        for x in members[v as usize].elements() {
            counts[x as usize] += 1;
        }
    }
    let stars = counts[1..].iter().filter(|&&c| c == full_star).count() as u32;
    let unions = u128::from(small_binomial(stars, params.r() - 1));
    match try_binomial::<u128>(inside.len() as u64, t as u64) {
        Some(subsets) => subsets > unions,
        None => true,
    }
}

/// Every maximum independent set, up to `cap` of them, in ascending order.
///
/// Errors with `Budget` when the node budget or the cap runs out.
pub fn all_maximum_independent_sets(
    sample: &SampledHypergraph,
    cap: usize,
    budget: u64,
) -> Result<Vec<Family>> {
    let solved = max_independent_set(sample, budget)?;
    let Some(alpha) = solved.alpha else {
        return Err(budget_error(budget));
    };
    let params = sample.params;
    let v = sample.vertex_count() as usize;
    let alpha = alpha as usize;
    let mut out: Vec<Vec<u32>> = Vec::new();
    let mut overflow = false;
    let mut push = |set: Vec<u32>| {
        if out.len() == cap {
            overflow = true;
            ControlFlow::Break(())
        } else {
            out.push(set);
            ControlFlow::Continue(())
        }
    };
    let walk = if params.r() == 2 {
        let pairs: Vec<(u32, u32)> =
            sample.retained().iter().map(|e| (e.ranks()[0], e.ranks()[1])).collect();
        GraphSearch::new(v, &pairs, budget).for_each_of_size(alpha, |s| push(s.to_vec()))
    } else {
        let c = compress(sample.retained(), v);
        let touched = c.touched.len();
        let tau = v - alpha;
        HittingSearch::new(touched, c.edges, budget).for_each_leaf(tau, &mut |h| {
            let h: Vec<u32> = h.iter().map(|&i| c.touched[i as usize]).collect();
            push(complement(v, &h))
        })
    };
    walk.map_err(|_| budget_error(budget))?;
    if overflow {
        return Err(Error::Budget { what: "maximum independent sets", budget: cap as u64 });
    }
    out.sort();
    out.into_iter().map(|s| family_from_ranks(&params, s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassLabel {
    #[serde(rename = "trivial")]
    Trivial,
    C1,
    C2,
    C3,
}

/// Star-concentration profile of a family of size `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub label: ClassLabel,
    /// Elements by decreasing `|𝒜_x|`, ties broken by the smaller element.
    pub x_order: Vec<u32>,
    /// `|𝒜_x|` along `x_order`.
    pub star_sizes: Vec<u64>,
    /// `z_i = N_i − |𝒜_{x_i} \ ∪_{j<i} 𝒜_{x_j}|` for `i = 1..r−1`.
    pub z: Vec<u64>,
    /// `|𝒜 \ ∪_{i<r} 𝒜_{x_i}|`.
    pub outside_top_stars: u64,
}

/// Classifies a family of exactly `N` members as trivial, C1, C2 or C3.
pub fn classify_family(family: &Family, params: &Params) -> Result<Classification> {
    if family.n() != params.n() || family.k() != params.k() {
        return Err(Error::Mismatch(format!(
            "family over ({}, {}) for params ({}, {})",
            family.n(),
            family.k(),
            params.n(),
            params.k()
        )));
    }
    let n_trivial = trivial_size::<u64>(params.n(), params.k(), params.r())?;
    if family.len() as u64 != n_trivial {
        return Err(Error::Domain(format!(
            "classifier needs {n_trivial} members, got {}",
            family.len()
        )));
    }
    let (n, k, r) = (params.n(), params.k(), u64::from(params.r()));
    let counts = element_counts(family);
    let mut x_order: Vec<u32> = (1..=n).collect();
    x_order.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]).then(a.cmp(&b)));
    let star_sizes: Vec<u64> = x_order.iter().map(|&x| counts[x as usize]).collect();

    let top = &x_order[..(r - 1) as usize];
    let mut seen: u64 = 0;
    let mut z = Vec::with_capacity(top.len());
    for (i, &x) in top.iter().enumerate() {
        let bit = 1u64 << (x - 1);
        let fresh = family
            .iter()
            .filter(|a| a.bits() & bit != 0 && a.bits() & seen == 0)
            .count() as u64;
        z.push(small_binomial(n - 1 - i as u32, k - 1) - fresh);
        seen |= bit;
    }
    let outside_top_stars = family.iter().filter(|a| a.bits() & seen == 0).count() as u64;

    let label = if is_trivial_union(family, params).is_some() {
        ClassLabel::Trivial
    } else if 2 * r * r * u64::from(k) * star_sizes[(r - 2) as usize] < n_trivial {
        ClassLabel::C1
    } else if 4 * r * r * z.iter().sum::<u64>() >= n_trivial {
        ClassLabel::C2
    } else {
        ClassLabel::C3
    };
    Ok(Classification { label, x_order, star_sizes, z, outside_top_stars })
}
