//! Greedy search for large independent sets near the star unions.
//!
//! Large independent sets in the sampled hypergraph are mostly a star
//! union with a few members traded for outside vertices, which is where the
//! exact searches are slowest to look. Anything returned here is verified
//! independent; `None` proves nothing.

use crate::model::SampledHypergraph;
use crate::subset::lex_unrank;

/// Consecutive non-improving moves allowed before giving up on a start.
const PLATEAU_MOVES: usize = 3;

pub(crate) fn star_neighbourhood_witness(sample: &SampledHypergraph, t: usize) -> Option<Vec<u32>> {
    let params = sample.params;
    let (n, k, r) = (params.n(), params.k(), params.r() as usize);
    let v = sample.vertex_count() as usize;
    let bits: Vec<u64> = (0..v as u64)
        .map(|i| lex_unrank(n, k, i).expect("rank below C(n,k)").bits())
        .collect();
    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); v];
    for (i, e) in sample.retained().iter().enumerate() {
        for &a in e.ranks() {
            incident[a as usize].push(i as u32);
        }
    }
    let edges = sample.retained();

    let mut q = vec![0u32; r - 1];
    let mut q_mask: u64;
    // Walk the (r−1)-subsets of [n] in lex order.
    for (i, slot) in q.iter_mut().enumerate() {
        *slot = i as u32;
    }
    loop {
        q_mask = q.iter().fold(0, |m, &x| m | 1u64 << x);
        // 0 = outside, 1 = kept star-union member, 2 = added outside vertex.
        let mut state: Vec<u8> = bits.iter().map(|&b| u8::from(b & q_mask != 0)).collect();
        let mut size = state.iter().filter(|&&s| s == 1).count();
        if size >= t {
            return Some(members(&state));
        }
        let mut plateau = 0;
        loop {
            let mut best: Option<(isize, usize, Vec<usize>)> = None;
            for a in 0..v {
                if state[a] != 0 || bits[a] & q_mask != 0 {
                    continue;
                }
                let mut removed: Vec<usize> = Vec::new();
                let mut allowed = true;
                for &e in &incident[a] {
                    let others = edges[e as usize].ranks().iter().map(|&b| b as usize).filter(|&b| b != a);
                    let mut inside = true;
                    let mut victim = None;
                    for b in others {
                        match state[b] {
                            0 => inside = false,
                            1 if !removed.contains(&b) => victim = victim.or(Some(b)),
                            1 => inside = false,
                            _ => {}
                        }
                    }
                    if inside {
                        match victim {
                            Some(b) => removed.push(b),
                            None => {
                                allowed = false;
                                break;
                            }
                        }
                    }
                }
                if !allowed {
                    continue;
                }
                let gain = 1 - removed.len() as isize;
                if best.as_ref().is_none_or(|(g, _, _)| gain > *g) {
                    best = Some((gain, a, removed));
                }
            }
            let Some((gain, a, removed)) = best else { break };
            if gain < 0 || (gain == 0 && plateau == PLATEAU_MOVES) {
                break;
            }
            plateau = if gain == 0 { plateau + 1 } else { 0 };
            state[a] = 2;
            for b in removed {
                state[b] = 0;
            }
            size = (size as isize + gain) as usize;
            if size >= t {
                return Some(members(&state));
            }
        }

        // Next (r−1)-subset.
        let m = r - 1;
        let mut i = m;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if q[i] < n - (m - i) as u32 {
                q[i] += 1;
                for j in i + 1..m {
                    q[j] = q[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn members(state: &[u8]) -> Vec<u32> {
    (0..state.len() as u32).filter(|&i| state[i as usize] != 0).collect()
}
