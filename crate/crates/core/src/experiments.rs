//! Monte Carlo trials over `KG^r_{n,k}(p)`: the trivial-plus-one statistic
//! `Y`, the `alpha = N` event, and sweeps over a grid of `p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::small_binomial;
use crate::error::{Error, Result};
use crate::model::{sample, sample_explicit, SampledHypergraph, SamplerKind};
use crate::params::{expected_trivial_plus_one, p_critical, trivial_size, Params};
use crate::rng::derive_seed;
use crate::solver::{find_independent_of_size, is_independent, max_independent_set};
use crate::subset::{lex_unrank, Family};

/// Samples with at most this many vertices get an exact alpha in every
/// trial; larger ones only decide `alpha = N`.
pub const EXACT_ALPHA_VERTICES: u64 = 64;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Number of pairs `(Q, A)` with `|Q| = r - 1`, `A ∉ S_Q` and
/// `S_Q ∪ {A}` independent in the sample.
///
/// `S_Q` itself is always independent, so only retained edges through `A`
/// can spoil a pair: an edge `{A, B_1, …, B_{r-1}}` spoils `Q` exactly when
/// every `B_i` meets `Q`.
pub fn y_statistic(sample: &SampledHypergraph) -> u64 {
    let params = sample.params;
    let (n, k, r) = (params.n(), params.k(), params.r());
    let v = sample.vertex_count() as usize;
    let bits: Vec<u64> =
        (0..v as u64).map(|i| lex_unrank(n, k, i).expect("rank below C(n,k)").bits()).collect();
    // For each vertex, the member masks of the other ends of its edges.
    let mut through: Vec<Vec<u64>> = vec![Vec::new(); v];
    for e in sample.retained() {
        for &a in e.ranks() {
            let slot = &mut through[a as usize];
            slot.extend(e.ranks().iter().filter(|&&b| b != a).map(|&b| bits[b as usize]));
        }
    }
    let ground = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let q_size = r - 1;
    let mut total = 0u64;
    for a in 0..v {
        let others = &through[a];
        let free = ground & !bits[a];
        if q_size == 1 {
            let spoiled = others.iter().fold(0u64, |m, &b| m | b);
            total += u64::from(n - k) - u64::from((spoiled & free).count_ones());
            continue;
        }
        let q_members = q_size as usize;
        for_each_submask(free, q_size, |q| {
            let spoiled = others.chunks(q_members).any(|bs| bs.iter().all(|&b| b & q != 0));
            if !spoiled {
                total += 1;
            }
        });
    }
    total
}

/// Calls `f` on every `size`-element submask of `mask`.
fn for_each_submask(mask: u64, size: u32, mut f: impl FnMut(u64)) {
    fn rec(rest: u64, left: u32, acc: u64, f: &mut dyn FnMut(u64)) {
        if left == 0 {
            f(acc);
            return;
        }
        let mut rest = rest;
        while rest.count_ones() >= left {
            let low = rest & rest.wrapping_neg();
            rest &= rest - 1;
            rec(rest, left - 1, acc | low, f);
        }
    }
    rec(mask, size, 0, &mut f);
}

/// What a sweep measures in each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Alpha,
    YOnly,
    Both,
}

impl SweepMode {
    fn alpha(self) -> bool {
        matches!(self, SweepMode::Alpha | SweepMode::Both)
    }

    fn y(self) -> bool {
        matches!(self, SweepMode::YOnly | SweepMode::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaOutcome {
    /// No independent set beyond the `N` of a star union.
    EqualsN,
    ExceedsN,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub p: f64,
    pub seed: u64,
    pub retained_edges: u64,
    pub outcome: Option<AlphaOutcome>,
    /// Exact when known: always for `alpha = N`, and for samples with at
    /// most [`EXACT_ALPHA_VERTICES`] vertices.
    pub alpha: Option<u64>,
    /// Ranks of an independent set of `N + 1` vertices when one exists.
    pub witness: Option<Vec<u64>>,
    #[serde(rename = "Y")]
    pub y: Option<u64>,
    pub nodes_explored: u64,
    /// Set when `Y > 0` but the solver reported `alpha = N`.
    pub implication_violated: bool,
}

/// Runs one trial: samples with `trial_seed`, then per `mode` decides
/// whether `alpha > N` and computes `Y`. Witnesses are verified against the
/// sample before being reported.
pub fn run_trial(
    params: &Params,
    p: f64,
    trial_seed: u64,
    budget: u64,
    mode: SweepMode,
    sampler: SamplerKind,
) -> Result<TrialRecord> {
    let s = sample(params, p, trial_seed, sampler)?;
    let n_trivial = trivial_size::<u64>(params.n(), params.k(), params.r())?;
    let y = mode.y().then(|| y_statistic(&s));
    let mut record = TrialRecord {
        p,
        seed: trial_seed,
        retained_edges: s.retained().len() as u64,
        outcome: None,
        alpha: None,
        witness: None,
        y,
        nodes_explored: 0,
        implication_violated: false,
    };
    if !mode.alpha() {
        return Ok(record);
    }

    let (outcome, alpha, witness) = if s.vertex_count() <= EXACT_ALPHA_VERTICES {
        let solved = max_independent_set(&s, budget)?;
        record.nodes_explored = solved.nodes_explored;
        match solved.alpha {
            None => (AlphaOutcome::BudgetExceeded, None, None),
            Some(a) if a > n_trivial => {
                let w: Vec<u64> = solved.witness.ranks().into_iter().take(n_trivial as usize + 1).collect();
                (AlphaOutcome::ExceedsN, Some(a), Some(w))
            }
            Some(a) => (AlphaOutcome::EqualsN, Some(a), None),
        }
    } else {
        match find_independent_of_size(&s, n_trivial + 1, budget) {
            Ok(q) => {
                record.nodes_explored = q.nodes_explored;
                match q.witness {
                    Some(w) => (AlphaOutcome::ExceedsN, None, Some(w.ranks())),
                    None => (AlphaOutcome::EqualsN, Some(n_trivial), None),
                }
            }
            Err(Error::Budget { .. }) => {
                record.nodes_explored = budget;
                (AlphaOutcome::BudgetExceeded, None, None)
            }
            Err(e) => return Err(e),
        }
    };
    if let Some(w) = &witness {
        let family = Family::from_ranks(params.n(), params.k(), w.iter().copied())?;
        if !is_independent(&s, &family) {
            return Err(Error::Domain(format!("solver witness at seed {trial_seed} is not independent")));
        }
    }
    record.implication_violated = outcome == AlphaOutcome::EqualsN && y.is_some_and(|y| y > 0);
    record.outcome = Some(outcome);
    record.alpha = alpha;
    record.witness = witness;
    Ok(record)
}

/// Coupled monotonicity for the explicit sampler: the trial's own uniforms
/// thinned to `p_lower < p` must keep its witness independent, so that
/// `alpha(p_lower) >= alpha(p)`. `None` when there is nothing to check.
pub fn coupled_check(params: &Params, p_lower: f64, record: &TrialRecord) -> Result<Option<bool>> {
    let Some(w) = &record.witness else {
        // alpha = N, and every sample keeps the star unions independent.
        return Ok(None);
    };
    let lower = sample_explicit(params, p_lower, record.seed)?;
    let family = Family::from_ranks(params.n(), params.k(), w.iter().copied())?;
    Ok(Some(is_independent(&lower, &family)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub params: Params,
    pub p_grid: Vec<f64>,
    pub trials_per_p: u64,
    pub master_seed: u64,
    pub sampler_kind: SamplerKind,
    pub solver_budget: u64,
    pub mode: SweepMode,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() {
            return Err(Error::Domain("p_grid is empty".into()));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain(format!("grid probability {p} outside [0, 1]")));
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("p_grid must be strictly ascending".into()));
        }
        if self.trials_per_p < 1 {
            return Err(Error::Domain("trials_per_p must be at least 1".into()));
        }
        self.params.require_bitmask()
    }

    /// Seed of trial `trial` at grid index `p_index`.
    pub fn trial_seed(&self, p_index: usize, trial: u64) -> u64 {
        derive_seed(self.master_seed, &[p_index as u64, trial])
    }
}

/// Wilson score interval at 95% for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64) -> Option<[f64; 2]> {
    if n == 0 {
        return None;
    }
    let (x, n) = (successes as f64, n as f64);
    let z2 = Z95 * Z95;
    let centre = (x + z2 / 2.0) / (n + z2);
    let half = Z95 / (n + z2) * (x * (n - x) / n + z2 / 4.0).sqrt();
    Some([(centre - half).max(0.0), (centre + half).min(1.0)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub p_over_pc: Option<f64>,
    pub trials: u64,
    #[serde(rename = "n_alpha_eq_N")]
    pub n_alpha_eq_n: Option<u64>,
    #[serde(rename = "n_alpha_gt_N")]
    pub n_alpha_gt_n: Option<u64>,
    pub n_budget: Option<u64>,
    /// `n_alpha_eq_N / (trials - n_budget)`
    pub frac_success: Option<f64>,
    pub wilson_95_interval: Option<[f64; 2]>,
    /// Mean over the trials whose alpha is exactly known.
    pub mean_alpha: Option<f64>,
    pub n_alpha_exact: Option<u64>,
    #[serde(rename = "mean_Y")]
    pub mean_y: Option<f64>,
    /// Standard error of `mean_Y`.
    #[serde(rename = "se_Y")]
    pub se_y: Option<f64>,
    #[serde(rename = "n_Y_positive")]
    pub n_y_positive: Option<u64>,
    #[serde(rename = "expected_Y_formula")]
    pub expected_y: f64,
    /// Trials with `Y > 0` but `alpha = N`; always zero unless something is
    /// broken.
    pub n_implication_violations: u64,
    pub n_coupled_checked: u64,
    pub n_coupled_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    /// `N`, the size of a star union.
    #[serde(rename = "N")]
    pub n_trivial: u64,
    pub p_c: Option<f64>,
    pub rows: Vec<SweepRow>,
}

/// Runs the sweep on the current rayon pool.
pub fn threshold_sweep(config: &SweepConfig) -> Result<SweepResult> {
    threshold_sweep_detailed(config).map(|(r, _)| r)
}

/// Runs the sweep on a fresh pool of `threads` workers.
pub fn threshold_sweep_with_threads(config: &SweepConfig, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    pool.install(|| threshold_sweep(config))
}

/// The sweep together with every trial record, grouped by grid point.
///
/// Trials run in parallel; records are gathered in `(p_index, trial)`
/// order, so the result does not depend on the number of threads.
pub fn threshold_sweep_detailed(config: &SweepConfig) -> Result<(SweepResult, Vec<Vec<TrialRecord>>)> {
    config.validate()?;
    let params = config.params;
    let n_trivial = trivial_size::<u64>(params.n(), params.k(), params.r())?;
    let p_c = p_critical::<f64>(&params).ok().map(|c| c.value);
    let coupled = config.sampler_kind == SamplerKind::Explicit && config.mode.alpha();

    let jobs: Vec<(usize, u64)> = (0..config.p_grid.len())
        .flat_map(|i| (0..config.trials_per_p).map(move |t| (i, t)))
        .collect();
    let results: Vec<Result<(TrialRecord, Option<bool>)>> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let p = config.p_grid[i];
            let rec = run_trial(&params, p, config.trial_seed(i, t), config.solver_budget, config.mode, config.sampler_kind)?;
            let check = if coupled && i > 0 { coupled_check(&params, config.p_grid[i - 1], &rec)? } else { None };
            Ok((rec, check))
        })
        .collect();

    let mut per_p: Vec<Vec<(TrialRecord, Option<bool>)>> = vec![Vec::new(); config.p_grid.len()];
    for (&(i, _), r) in jobs.iter().zip(results) {
        per_p[i].push(r?);
    }
    let rows = per_p
        .iter()
        .zip(&config.p_grid)
        .map(|(trials, &p)| aggregate(&params, config.mode, p, p_c, trials))
        .collect::<Result<Vec<_>>>()?;
    let records = per_p.into_iter().map(|v| v.into_iter().map(|(r, _)| r).collect()).collect();
    Ok((SweepResult { config: config.clone(), n_trivial, p_c, rows }, records))
}

fn aggregate(
    params: &Params,
    mode: SweepMode,
    p: f64,
    p_c: Option<f64>,
    trials: &[(TrialRecord, Option<bool>)],
) -> Result<SweepRow> {
    let count = |o: AlphaOutcome| trials.iter().filter(|(r, _)| r.outcome == Some(o)).count() as u64;
    let total = trials.len() as u64;
    let (eq, gt, budget) = if mode.alpha() {
        (
            Some(count(AlphaOutcome::EqualsN)),
            Some(count(AlphaOutcome::ExceedsN)),
            Some(count(AlphaOutcome::BudgetExceeded)),
        )
    } else {
        (None, None, None)
    };
    let decided = budget.map(|b| total - b);
    let frac_success = match (eq, decided) {
        (Some(e), Some(d)) if d > 0 => Some(e as f64 / d as f64),
        _ => None,
    };
    let wilson = eq.zip(decided).and_then(|(e, d)| wilson_interval(e, d));

    let alphas: Vec<f64> = trials.iter().filter_map(|(r, _)| r.alpha).map(|a| a as f64).collect();
    let mean_alpha = (!alphas.is_empty()).then(|| alphas.iter().sum::<f64>() / alphas.len() as f64);

    let ys: Vec<f64> = trials.iter().filter_map(|(r, _)| r.y).map(|y| y as f64).collect();
    let (mean_y, se_y) = if mode.y() && !ys.is_empty() {
        let m = ys.iter().sum::<f64>() / ys.len() as f64;
        let se = if ys.len() > 1 {
            let var = ys.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (ys.len() - 1) as f64;
            Some((var / ys.len() as f64).sqrt())
        } else {
            None
        };
        (Some(m), se)
    } else {
        (None, None)
    };
    let n_y_positive = mode.y().then(|| trials.iter().filter(|(r, _)| r.y.is_some_and(|y| y > 0)).count() as u64);

    Ok(SweepRow {
        p,
        p_over_pc: p_c.map(|c| p / c),
        trials: total,
        n_alpha_eq_n: eq,
        n_alpha_gt_n: gt,
        n_budget: budget,
        frac_success,
        wilson_95_interval: wilson,
        mean_alpha,
        n_alpha_exact: mode.alpha().then_some(alphas.len() as u64),
        mean_y,
        se_y,
        n_y_positive,
        expected_y: expected_trivial_plus_one::<f64>(params, p)?,
        n_implication_violations: trials.iter().filter(|(r, _)| r.implication_violated).count() as u64,
        n_coupled_checked: trials.iter().filter(|(_, c)| c.is_some()).count() as u64,
        n_coupled_violations: trials.iter().filter(|(_, c)| *c == Some(false)).count() as u64,
    })
}

/// `Y` at `p = 0`: every pair counts.
pub fn y_at_p_zero(params: &Params) -> u64 {
    let (n, k, r) = (params.n(), params.k(), params.r());
    small_binomial(n, r - 1) * small_binomial(n - r + 1, k)
}
