//! Exact minimum hitting sets of a uniform hypergraph by edge branching.
//!
//! At each node the uncovered edge with the fewest selectable vertices is
//! split: branch `j` takes its `j`-th vertex and bans the earlier ones, so
//! the branches partition the remaining hitting sets. A greedy packing of
//! pairwise vertex-disjoint uncovered edges gives the lower bound.

use std::ops::ControlFlow;

use super::clique::BudgetHit;

#[derive(Clone, Copy)]
enum Mode {
    /// Find a hitting set smaller than the best so far.
    Minimize,
    /// Stop at the first hitting set of at most this size.
    AtMost(usize),
    /// Visit every leaf of at most this size.
    Leaves(usize),
}

pub(crate) struct HittingSearch {
    edges: Vec<Vec<u32>>,
    incident: Vec<Vec<u32>>,
    hits: Vec<u32>,
    chosen: Vec<u32>,
    banned: Vec<bool>,
    stamp: Vec<u64>,
    clock: u64,
    pub(crate) nodes: u64,
    budget: u64,
    best: Option<Vec<u32>>,
    best_size: usize,
}

impl HittingSearch {
    /// `edges` hold vertex ids below `vertices`, each sorted ascending.
    pub(crate) fn new(vertices: usize, edges: Vec<Vec<u32>>, budget: u64) -> Self {
        let mut incident = vec![Vec::new(); vertices];
        for (i, e) in edges.iter().enumerate() {
            for &v in e {
                incident[v as usize].push(i as u32);
            }
        }
        HittingSearch {
            hits: vec![0; edges.len()],
            edges,
            incident,
            chosen: Vec::new(),
            banned: vec![false; vertices],
            stamp: vec![0; vertices],
            clock: 0,
            nodes: 0,
            budget,
            best: None,
            best_size: usize::MAX,
        }
    }

    /// Minimum hitting set of size below `upper`, if one exists.
    pub(crate) fn minimize(&mut self, upper: usize) -> Result<Option<Vec<u32>>, BudgetHit> {
        self.best = None;
        self.best_size = upper;
        let mut noop = |_: &[u32]| ControlFlow::Continue(());
        let _ = self.search(Mode::Minimize, &mut noop)?;
        Ok(self.best.take())
    }

    /// Some hitting set with at most `s` vertices.
    pub(crate) fn find_at_most(&mut self, s: usize) -> Result<Option<Vec<u32>>, BudgetHit> {
        self.best = None;
        let mut noop = |_: &[u32]| ControlFlow::Continue(());
        let _ = self.search(Mode::AtMost(s), &mut noop)?;
        Ok(self.best.take())
    }

    /// Visits branch leaves with at most `s` vertices. Every hitting set of
    /// at most `s` vertices contains exactly one visited leaf, and every
    /// minimum one is visited itself. Returns whether the walk finished.
    pub(crate) fn for_each_leaf(
        &mut self,
        s: usize,
        visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
    ) -> Result<bool, BudgetHit> {
        Ok(self.search(Mode::Leaves(s), visit)?.is_continue())
    }

    fn choose(&mut self, v: u32) {
        self.chosen.push(v);
        for &e in &self.incident[v as usize] {
            self.hits[e as usize] += 1;
        }
    }

    fn unchoose(&mut self, v: u32) {
        self.chosen.pop();
        for &e in &self.incident[v as usize] {
            self.hits[e as usize] -= 1;
        }
    }

    fn search(
        &mut self,
        mode: Mode,
        visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>, BudgetHit> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(BudgetHit);
        }
        let limit = match mode {
            Mode::Minimize => match self.best_size.checked_sub(1) {
                Some(l) => l,
                None => return Ok(ControlFlow::Continue(())),
            },
            Mode::AtMost(s) | Mode::Leaves(s) => s,
        };
        if self.chosen.len() > limit {
            return Ok(ControlFlow::Continue(()));
        }

        // Uncovered edges bucketed by how many vertices remain selectable.
        let mut buckets: Vec<Vec<u32>> = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if self.hits[i] > 0 {
                continue;
            }
            let avail = e.iter().filter(|&&v| !self.banned[v as usize]).count();
            if avail == 0 {
                return Ok(ControlFlow::Continue(()));
            }
            if buckets.len() <= avail {
                buckets.resize(avail + 1, Vec::new());
            }
            buckets[avail].push(i as u32);
        }
        let Some(branch_edge) = buckets.iter().flatten().next().copied() else {
            return Ok(self.leaf(mode, visit));
        };

        if self.chosen.len() == limit {
            return Ok(ControlFlow::Continue(()));
        }
        self.clock += 1;
        let mut packing = 0usize;
        for &e in buckets.iter().flatten() {
            let edge = &self.edges[e as usize];
            let free = edge
                .iter()
                .all(|&v| self.banned[v as usize] || self.stamp[v as usize] != self.clock);
            if free {
                packing += 1;
                for &v in edge {
                    self.stamp[v as usize] = self.clock;
                }
                if self.chosen.len() + packing > limit {
                    return Ok(ControlFlow::Continue(()));
                }
            }
        }

        let options: Vec<u32> = self.edges[branch_edge as usize]
            .iter()
            .copied()
            .filter(|&v| !self.banned[v as usize])
            .collect();
        let mut flow = ControlFlow::Continue(());
        let mut banned_here = 0;
        for &v in &options {
            self.choose(v);
            let r = self.search(mode, visit);
            self.unchoose(v);
            match r {
                Ok(ControlFlow::Continue(())) => {}
                Ok(ControlFlow::Break(())) => {
                    flow = ControlFlow::Break(());
                    break;
                }
                Err(hit) => {
                    self.unban(&options[..banned_here]);
                    return Err(hit);
                }
            }
            self.banned[v as usize] = true;
            banned_here += 1;
        }
        self.unban(&options[..banned_here]);
        Ok(flow)
    }

    fn unban(&mut self, vs: &[u32]) {
        for &v in vs {
            self.banned[v as usize] = false;
        }
    }

    fn leaf(&mut self, mode: Mode, visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>) -> ControlFlow<()> {
        match mode {
            Mode::Minimize => {
                if self.chosen.len() < self.best_size {
                    self.best_size = self.chosen.len();
                    self.best = Some(self.sorted_chosen());
                }
                ControlFlow::Continue(())
            }
            Mode::AtMost(_) => {
                self.best = Some(self.sorted_chosen());
                ControlFlow::Break(())
            }
            Mode::Leaves(_) => visit(&self.sorted_chosen()),
        }
    }

    fn sorted_chosen(&self) -> Vec<u32> {
        let mut c = self.chosen.clone();
        c.sort_unstable();
        c
    }
}
