//! Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if
//! any criterion fails. The oracles here are deliberately naive and share
//! no code with the library beyond the types they inspect.

use std::collections::HashSet;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kneser_core::experiments::{threshold_sweep_detailed, y_statistic, AlphaOutcome, SweepConfig, SweepMode, TrialRecord};
use kneser_core::extremal::verify_lex_minimality;
use kneser_core::model::{complete, sample, sample_explicit, total_edge_count, trivial_plus_one_edge_count, SampledHypergraph, SamplerKind};
use kneser_core::params::derive;
use kneser_core::solver::{all_maximum_independent_sets, max_independent_set, DEFAULT_NODE_BUDGET};
use kneser_core::{Family, KSubset, Params};

/// Node budget per trial in the n = 30 sweep.
const SWEEP_BUDGET: u64 = 8_000_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn main() {
    let criteria: Vec<(&str, Duration, fn() -> Outcome)> = vec![
        ("identity suite", Duration::from_secs(1), identities),
        ("M oracle", Duration::from_secs(30), m_oracle),
        ("total-edge oracle", Duration::from_secs(10), total_edges),
        ("classical values at p = 1", Duration::from_secs(120), classical_values),
        ("solver vs exhaustive alpha", Duration::from_secs(60), solver_vs_exhaustive),
        ("sampler equivalence", Duration::from_secs(60), sampler_equivalence),
        ("E[Y] reproduction", Duration::from_secs(120), expected_y),
        ("lex minimality", Duration::from_secs(120), lex_minimality),
        ("threshold trend + Y > 0 proxy", Duration::from_secs(30 * 60), threshold_trend),
        ("determinism across thread counts", Duration::from_secs(5 * 60), determinism),
    ];
    // Comma-separated labels, e.g. ACCEPTANCE_ONLY=1,2,11. Unset runs everything.
    let only: Option<Vec<String>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').map(|x| x.trim().to_string()).collect());
    let mut all = true;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let label = if i < 8 { format!("{}", i + 1) } else if i == 8 { "9+10".to_string() } else { "11".to_string() };
        if only.as_ref().is_some_and(|o| !o.contains(&label)) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = took <= limit;
        let ok = out.passed && in_time;
        all &= ok;
        println!(
            "{} [{label}] {name} ({:.1}s, limit {}s): {}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- oracles

fn binom(n: i64, k: i64) -> u128 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Every k-subset of 1..=n as a sorted vector, in lex order.
fn k_subsets(n: u32, k: u32) -> Vec<Vec<u32>> {
    fn rec(start: u32, n: u32, k: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k as usize {
            out.push(cur.clone());
            return;
        }
        for x in start..=n {
            cur.push(x);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::new(), &mut out);
    out
}

fn disjoint(a: &[u32], b: &[u32]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

/// Number of r-subsets of `sets` that are pairwise disjoint.
fn count_disjoint_tuples(sets: &[Vec<u32>], r: usize) -> u64 {
    fn rec(sets: &[Vec<u32>], start: usize, chosen: &mut Vec<usize>, r: usize) -> u64 {
        if chosen.len() == r {
            return 1;
        }
        let mut total = 0;
        for i in start..sets.len() {
            if chosen.iter().all(|&j| disjoint(&sets[i], &sets[j])) {
                chosen.push(i);
                total += rec(sets, i + 1, chosen, r);
                chosen.pop();
            }
        }
        total
    }
    rec(sets, 0, &mut Vec::new(), r)
}

/// Edges of a sample as vectors of member sets.
fn edge_members(s: &SampledHypergraph) -> Vec<Vec<usize>> {
    s.retained().iter().map(|e| e.ranks().iter().map(|&x| x as usize).collect()).collect()
}

fn independent(edges: &[Vec<usize>], inside: &HashSet<usize>) -> bool {
    !edges.iter().any(|e| e.iter().all(|v| inside.contains(v)))
}

fn ranks_of(f: &Family) -> HashSet<usize> {
    f.ranks().into_iter().map(|r| r as usize).collect()
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn wilson(x: u64, n: u64) -> (f64, f64) {
    let z = 1.959_963_984_540_054f64;
    let (x, n) = (x as f64, n as f64);
    let c = (x + z * z / 2.0) / (n + z * z);
    let h = z / (n + z * z) * (x * (n - x) / n + z * z / 4.0).sqrt();
    (c - h, c + h)
}

fn params(n: u32, k: u32, r: u32) -> Params {
    Params::new(n, k, r).expect("valid parameters")
}

// -------------------------------------------------------------- criteria

fn identities() -> Outcome {
    let mut checked = 0;
    for k in 2..=5u32 {
        for r in 2..=5u32 {
            for n in r * k..=40 {
                let q = derive(&params(n, k, r)).expect("quantities");
                let (n, k, r) = (i64::from(n), i64::from(k), i64::from(r));
                let n_big: u128 = q.n_trivial.to_string().parse().expect("fits u128");
                let h: u128 = q.h.to_string().parse().expect("fits u128");
                let sum: u128 = q.n_i.iter().map(|x| x.to_string().parse::<u128>().expect("fits")).sum();
                let expected_n = binom(n, k) - binom(n - r + 1, k);
                let ok = n_big == expected_n
                    && sum == n_big
                    && h <= k as u128 * binom(n - 2, k - 2)
                    && (r - 1) as u128 * binom(n - r + 1, k - 1) <= n_big
                    && n_big <= (r - 1) as u128 * binom(n - 1, k - 1);
                if !ok {
                    return outcome(false, format!("identity broken at ({n},{k},{r})"));
                }
                checked += 1;
            }
        }
    }
    outcome(true, format!("{checked} parameter sets exact"))
}

fn m_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for (n, k, r) in [(8u32, 2u32, 2u32), (10, 2, 2), (10, 2, 3), (12, 3, 2), (11, 2, 4)] {
        let product: u128 = (1..i64::from(r))
            .map(|i| binom(i64::from(n) - i * i64::from(k) - (i64::from(r) - i), i64::from(k) - 1))
            .product();
        let m_lib: u128 = derive(&params(n, k, r)).expect("quantities").m.to_string().parse().expect("fits");
        if m_lib != product {
            return outcome(false, format!("({n},{k},{r}): library M {m_lib}, product {product}"));
        }
        for _ in 0..25 {
            let q: Vec<u32> = index::sample(&mut rng, n as usize, (r - 1) as usize).into_iter().map(|x| x as u32 + 1).collect();
            let rest: Vec<u32> = (1..=n).filter(|x| !q.contains(x)).collect();
            let mut a: Vec<u32> = index::sample(&mut rng, rest.len(), k as usize).into_iter().map(|i| rest[i]).collect();
            a.sort_unstable();
            let mut family: Vec<Vec<u32>> = k_subsets(n, k).into_iter().filter(|s| s.iter().any(|x| q.contains(x))).collect();
            family.push(a.clone());
            let brute = count_disjoint_tuples(&family, r as usize);
            let lib = trivial_plus_one_edge_count(&params(n, k, r), &{
                let mut q = q.clone();
                q.sort_unstable();
                q
            }, &KSubset::new(n, &a).expect("subset"))
            .expect("count");
            if u128::from(brute) != product || lib != brute {
                return outcome(false, format!("({n},{k},{r}) Q={q:?} A={a:?}: brute {brute}, library {lib}, product {product}"));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} random (Q, A) pairs over 5 instances"))
}

fn total_edges() -> Outcome {
    let mut checked = Vec::new();
    for n in 4..=30u32 {
        for k in 2..=n / 2 {
            if binom(i64::from(n), i64::from(k)) > 30 {
                continue;
            }
            for r in 2..=n / k {
                let brute = count_disjoint_tuples(&k_subsets(n, k), r as usize);
                let formula: u64 = total_edge_count(&params(n, k, r)).to_string().parse().expect("fits");
                if brute != formula {
                    return outcome(false, format!("({n},{k},{r}): brute {brute}, formula {formula}"));
                }
                checked.push(((n, k, r), brute));
            }
        }
    }
    let pinned = checked.contains(&((6, 2, 2), 45)) && checked.contains(&((6, 2, 3), 15));
    outcome(pinned, format!("{} instances with C(n,k) <= 30 (KG^2_6,2 = 45, KG^3_6,2 = 15)", checked.len()))
}

fn classical_values() -> Outcome {
    let mut parts = Vec::new();
    for (n, k, r) in [(5u32, 2u32, 2u32), (6, 2, 2), (10, 2, 2), (8, 2, 3)] {
        // Formula: max{C(rk-1,k), C(n,k) - C(n-r+1,k)}.
        let (ni, ki, ri) = (i64::from(n), i64::from(k), i64::from(r));
        let formula = binom(ri * ki - 1, ki).max(binom(ni, ki) - binom(ni - ri + 1, ki)) as u64;
        let full = complete(&params(n, k, r)).expect("complete");
        let solved = max_independent_set(&full, DEFAULT_NODE_BUDGET).expect("solve");
        let witness_ok = solved.witness.len() as u64 == formula && independent(&edge_members(&full), &ranks_of(&solved.witness));
        if solved.alpha != Some(formula) || !witness_ok {
            return outcome(false, format!("({n},{k},{r}): alpha {:?}, formula {formula}", solved.alpha));
        }
        parts.push(format!("({n},{k},{r})={formula}"));
    }
    // Every maximum independent set of KG^3_{8,2} is a union of two stars.
    let p = params(8, 2, 3);
    let maxima = all_maximum_independent_sets(&complete(&p).expect("complete"), 10_000, DEFAULT_NODE_BUDGET).expect("maxima");
    let subsets = k_subsets(8, 2);
    let star_unions: HashSet<Vec<usize>> = (1..=8u32)
        .flat_map(|x| (x + 1..=8).map(move |y| (x, y)))
        .map(|(x, y)| (0..subsets.len()).filter(|&i| subsets[i].contains(&x) || subsets[i].contains(&y)).collect())
        .collect();
    let all_trivial = maxima.iter().all(|f| {
        let mut r: Vec<usize> = f.ranks().into_iter().map(|x| x as usize).collect();
        r.sort_unstable();
        star_unions.contains(&r)
    });
    let ok = all_trivial && maxima.len() == star_unions.len();
    parts.push(format!("(8,2,3) maxima: {} found, all star unions: {all_trivial}", maxima.len()));
    outcome(ok, parts.join(", "))
}

/// Largest independent set by trying every subset of a tiny vertex set.
fn brute_alpha(s: &SampledHypergraph) -> u64 {
    let v = s.vertex_count() as usize;
    let masks: Vec<u32> = edge_members(s).iter().map(|e| e.iter().fold(0u32, |m, &x| m | 1 << x)).collect();
    (0u32..1 << v).filter(|&x| masks.iter().all(|&e| x & e != e)).map(|x| u64::from(x.count_ones())).max().unwrap_or(0)
}

fn solver_vs_exhaustive() -> Outcome {
    let p6 = params(6, 2, 2);
    for i in 0..100u64 {
        let p = [0.2, 0.5, 0.8][(i % 3) as usize];
        let kind = if i % 2 == 0 { SamplerKind::Explicit } else { SamplerKind::ByCount };
        let s = sample(&p6, p, 1000 + i, kind).expect("sample");
        let brute = brute_alpha(&s);
        let solved = max_independent_set(&s, DEFAULT_NODE_BUDGET).expect("solve");
        if solved.alpha != Some(brute) {
            return outcome(false, format!("seed {}: solver {:?}, exhaustive {brute}", 1000 + i, solved.alpha));
        }
    }
    outcome(true, "100 samples of KG_6,2(p), p in {0.2, 0.5, 0.8}, V = 15")
}

fn sampler_equivalence() -> Outcome {
    let p6 = params(6, 2, 2);
    let p = 0.3;
    let seeds = 2000u64;
    let all_edges: Vec<(u32, u32)> = {
        let subs = k_subsets(6, 2);
        let mut v = Vec::new();
        for a in 0..subs.len() {
            for b in a + 1..subs.len() {
                if disjoint(&subs[a], &subs[b]) {
                    v.push((a as u32, b as u32));
                }
            }
        }
        v
    };
    let mut parts = Vec::new();
    let mut ok = all_edges.len() == 45;
    for kind in [SamplerKind::Explicit, SamplerKind::ByCount] {
        let mut freq = vec![0u64; all_edges.len()];
        let mut counts = Vec::new();
        for seed in 0..seeds {
            let s = sample(&p6, p, 50_000 + seed, kind).expect("sample");
            counts.push(s.retained().len() as f64);
            for e in s.retained() {
                let key = (e.ranks()[0], e.ranks()[1]);
                let i = all_edges.iter().position(|&x| x == key).expect("retained edge is a Kneser edge");
                freq[i] += 1;
            }
        }
        let sigma = (p * (1.0 - p) / seeds as f64).sqrt();
        let worst = freq.iter().map(|&f| (f as f64 / seeds as f64 - p).abs() / sigma).fold(0.0f64, f64::max);
        let (m, se) = mean_se(&counts);
        let z = (m - 13.5).abs() / se;
        ok &= worst <= 4.0 && z <= 3.0;
        parts.push(format!("{kind:?}: worst edge {worst:.2} sigma, mean count {m:.3} ({z:.2} SE)"));
    }
    outcome(ok, parts.join("; "))
}

/// `Y` by checking every `(Q, A)` against every retained edge.
fn brute_y(s: &SampledHypergraph, n: u32, k: u32) -> u64 {
    let subs = k_subsets(n, k);
    let edges = edge_members(s);
    let mut y = 0;
    for x in 1..=n {
        let mut inside: HashSet<usize> = (0..subs.len()).filter(|&i| subs[i].contains(&x)).collect();
        for a in 0..subs.len() {
            if subs[a].contains(&x) {
                continue;
            }
            inside.insert(a);
            if independent(&edges, &inside) {
                y += 1;
            }
            inside.remove(&a);
        }
    }
    y
}

fn expected_y() -> Outcome {
    let p10 = params(10, 2, 2);
    let mut parts = Vec::new();
    let mut ok = true;
    for (j, p) in [0.05f64, 0.1, 0.2].into_iter().enumerate() {
        let formula = 10.0 * 36.0 * (1.0 - p).powi(7);
        let mut ys = Vec::new();
        for t in 0..1000u64 {
            let s = sample_explicit(&p10, p, 7_000_000 + 10_000 * j as u64 + t).expect("sample");
            let y = y_statistic(&s);
            if t < 50 && y != brute_y(&s, 10, 2) {
                return outcome(false, format!("library Y disagrees with brute force at p={p}, trial {t}"));
            }
            ys.push(y as f64);
        }
        let (m, se) = mean_se(&ys);
        let z = (m - formula).abs() / se;
        ok &= z <= 3.0;
        parts.push(format!("p={p}: {m:.2} vs {formula:.2} ({z:.2} SE)"));
    }
    outcome(ok, parts.join("; "))
}

fn lex_minimality() -> Outcome {
    let subs = k_subsets(6, 2);
    let v = subs.len();
    let edge_pairs: Vec<(usize, usize)> =
        (0..v).flat_map(|a| (a + 1..v).map(move |b| (a, b))).filter(|&(a, b)| disjoint(&subs[a], &subs[b])).collect();
    let mut parts = Vec::new();
    for s in 1..=7usize {
        let mut brute_min = u64::MAX;
        let mut families = 0u64;
        for combo in combinations(v, s) {
            let mut inside = vec![false; v];
            for &i in &combo {
                inside[i] = true;
            }
            let e = edge_pairs.iter().filter(|&&(a, b)| inside[a] && inside[b]).count() as u64;
            brute_min = brute_min.min(e);
            families += 1;
        }
        let lex_edges = edge_pairs.iter().filter(|&&(a, b)| a < s && b < s).count() as u64;
        let rep = verify_lex_minimality(6, 2, 2, s as u64).expect("report");
        let ok = rep.exhaustive
            && rep.families_enumerated == families
            && rep.lex_edges == lex_edges
            && rep.min_edges == brute_min
            && rep.min_attained_by_lex
            && lex_edges == brute_min;
        if !ok {
            return outcome(false, format!("s={s}: report {rep:?}, brute min {brute_min}, lex {lex_edges}"));
        }
        parts.push(format!(
            "s={s}: {lex_edges} (l={}, regime {})",
            rep.l,
            rep.hypothesis_holds.map_or("n/a".into(), |h| h.to_string())
        ));
    }
    outcome(true, parts.join(", "))
}

fn combinations(v: usize, s: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = Some((0..s).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut c = out.clone();
        let mut i = s;
        cur = loop {
            if i == 0 {
                break None;
            }
            i -= 1;
            if c[i] < v - s + i {
                c[i] += 1;
                for j in i + 1..s {
                    c[j] = c[j - 1] + 1;
                }
                break Some(c);
            }
        };
        Some(out)
    })
}

fn threshold_trend() -> Outcome {
    let p30 = params(30, 2, 2);
    let pc = (binom(30, 1) as f64 * binom(29, 2) as f64).ln() / 27.0;
    let hi = 1.6f64.min(1.0 / pc);
    let grid: Vec<f64> = (0..8).map(|i| pc * (0.4 + (hi - 0.4) * f64::from(i) / 7.0)).collect();
    let config = SweepConfig {
        params: p30,
        p_grid: grid.clone(),
        trials_per_p: 200,
        master_seed: 20_240_601,
        sampler_kind: SamplerKind::Explicit,
        solver_budget: SWEEP_BUDGET,
        mode: SweepMode::Both,
    };
    let (result, records) = match threshold_sweep_detailed(&config) {
        Ok(x) => x,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let n_trivial = 29;
    let mut fracs = Vec::new();
    let mut notes = Vec::new();
    let mut ok = true;
    for (j, trials) in records.iter().enumerate() {
        let eq = trials.iter().filter(|t| t.outcome == Some(AlphaOutcome::EqualsN)).count() as u64;
        let budget = trials.iter().filter(|t| t.outcome == Some(AlphaOutcome::BudgetExceeded)).count() as u64;
        let decided = trials.len() as u64 - budget;
        let row = &result.rows[j];
        ok &= row.n_alpha_eq_n == Some(eq) && row.n_budget == Some(budget) && decided > 0;
        fracs.push((eq as f64 / decided as f64, wilson(eq, decided)));
        // Y > 0 means an independent (N+1)-family, so alpha > N.
        let broken = trials.iter().filter(|t| t.y.unwrap_or(0) > 0 && t.outcome == Some(AlphaOutcome::EqualsN)).count();
        ok &= broken == 0;
        if j > 0 {
            ok &= coupled_ok(&p30, grid[j - 1], trials, n_trivial);
        }
        let y_pos = trials.iter().filter(|t| t.y.unwrap_or(0) > 0).count() as f64 / trials.len() as f64;
        if grid[j] <= 0.5 * pc {
            ok &= y_pos >= 0.9;
        }
        notes.push(format!(
            "{:.3}p_c: {}/{} (budget {budget}), P(Y>0)={y_pos:.2}",
            grid[j] / pc,
            eq,
            decided
        ));
    }
    for i in 0..fracs.len() {
        for j in i + 1..fracs.len() {
            let ((fi, wi), (fj, wj)) = (fracs[i], fracs[j]);
            // A drop is tolerated only while the intervals still overlap.
            if fi > fj && wi.0 > wj.1 {
                ok = false;
                notes.push(format!("drop between points {i} and {j}"));
            }
        }
    }
    let spread = fracs[fracs.len() - 1].0 - fracs[0].0;
    ok &= spread >= 0.5;
    outcome(ok, format!("spread {spread:.2}; {}", notes.join("; ")))
}

/// Each trial's witness must stay independent in the same trial's uniforms
/// thinned to the previous grid probability.
fn coupled_ok(params: &Params, p_lower: f64, trials: &[TrialRecord], n_trivial: usize) -> bool {
    trials.iter().all(|t| match &t.witness {
        None => t.outcome != Some(AlphaOutcome::ExceedsN),
        Some(w) => {
            let lower = sample_explicit(params, p_lower, t.seed).expect("sample");
            let inside: HashSet<usize> = w.iter().map(|&x| x as usize).collect();
            inside.len() == n_trivial + 1 && independent(&edge_members(&lower), &inside)
        }
    })
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_kneser-lab");
    let dir = std::env::temp_dir().join(format!("kneser-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let config = dir.join("sweep.json");
    std::fs::write(
        &config,
        r#"{"params":{"n":12,"k":2,"r":2},"p_grid":[0.2,0.4,0.6,0.8],"trials_per_p":40,
           "master_seed":99,"sampler_kind":"explicit","solver_budget":5000000,"mode":"both"}"#,
    )
    .expect("write config");
    let run = |args: &[&str], threads: &str| {
        let out = Command::new(bin).args(args).env("KNESER_LAB_THREADS", threads).output().expect("run cli");
        (out.status.code(), out.stdout)
    };
    let cfg = config.to_str().expect("utf-8 path");
    let sweep1 = run(&["sweep", "--config", cfg], "1");
    let sweep8 = run(&["sweep", "--config", cfg], "8");
    let verify1 = run(&["verify"], "1");
    let verify8 = run(&["verify"], "8");
    let again = run(&["sweep", "--config", cfg, "--threads", "3"], "8");
    let _ = std::fs::remove_dir_all(&dir);
    let ok = sweep1.0 == Some(0)
        && verify1.0 == Some(0)
        && sweep1 == sweep8
        && sweep1 == again
        && verify1 == verify8
        && !sweep1.1.is_empty();
    outcome(ok, format!("sweep {} bytes, verify {} bytes, identical at 1 and 8 threads: {ok}", sweep1.1.len(), verify1.1.len()))
}
