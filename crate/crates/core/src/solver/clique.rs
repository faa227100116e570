//! Independent sets of a graph, searched as cliques of its complement.
//!
//! Bitset branch and bound in the MCQ/BBMC family: candidates are
//! greedily partitioned into cliques of the graph (each contributes at most
//! one vertex to an independent set), which bounds how far the current set
//! can still grow. A vertex that would need a class of its own is first
//! offered to a lower class by swapping out a single clashing member, then
//! checked against the lower classes by unit propagation: if taking it
//! forces a chain of classes to run dry, it adds nothing to the bound.
//!
//! Rows are fixed-width word arrays; the engine is instantiated for a
//! handful of widths and the narrowest one that fits the graph is used.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::ControlFlow;

/// Largest vertex count the dense adjacency matrix is built for.
pub(crate) const MAX_GRAPH_VERTICES: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct BudgetHit;

#[derive(Clone, Copy)]
enum Mode {
    /// Improve on the best size seen so far.
    Maximize,
    /// Stop at the first set of at least this size.
    AtLeast(usize),
    /// Visit every independent set of exactly this size.
    Exactly(usize),
}

impl Mode {
    fn target(self, best_len: usize) -> usize {
        match self {
            Mode::Maximize | Mode::AtLeast(_) => best_len + 1,
            Mode::Exactly(t) => t,
        }
    }
}

type Visit<'a> = dyn FnMut(&[usize]) -> ControlFlow<()> + 'a;

#[inline]
fn is_empty<const W: usize>(x: &[u64; W]) -> bool {
    x.iter().all(|&w| w == 0)
}

/// How many bits `x` has, capped at two. Cheaper than a popcount where
/// the CPU has no instruction for it.
#[inline]
fn few<const W: usize>(x: &[u64; W]) -> u8 {
    let mut seen = 0;
    for &w in x {
        if w != 0 {
            if seen == 1 || w & (w - 1) != 0 {
                return 2;
            }
            seen = 1;
        }
    }
    seen
}

#[inline]
fn lowest<const W: usize>(x: &[u64; W]) -> usize {
    let j = x.iter().position(|&w| w != 0).expect("non-empty set");
    (j << 6) | x[j].trailing_zeros() as usize
}

#[inline]
fn set<const W: usize>(x: &mut [u64; W], v: usize) {
    x[v >> 6] |= 1u64 << (v & 63);
}

#[inline]
fn clear<const W: usize>(x: &mut [u64; W], v: usize) {
    x[v >> 6] &= !(1u64 << (v & 63));
}

const FREE: u8 = 0;
const QUEUED: u8 = 1;
const DONE: u8 = 2;
const SPENT: u8 = 3;

/// Colouring buffers, reused at every node.
struct Bound<const W: usize> {
    /// Classes below the branching threshold.
    low: Vec<[u64; W]>,
    /// Low classes already given up to an absorbed vertex.
    spent: Vec<bool>,
    /// Members of each low class still compatible during propagation.
    fit: Vec<[u64; W]>,
    mark: Vec<u8>,
    queue: Vec<usize>,
    chain: Vec<usize>,
}

impl<const W: usize> Bound<W> {
    fn new() -> Self {
        Bound { low: Vec::new(), spent: Vec::new(), fit: Vec::new(), mark: Vec::new(), queue: Vec::new(), chain: Vec::new() }
    }

    /// Greedy clique partition of `p`; fills `verts` with the vertices whose
    /// colour is at least `kmin`, in increasing colour order.
    fn colour(&mut self, adj: &[[u64; W]], p: &[u64; W], kmin: usize, verts: &mut Vec<u32>, colours: &mut Vec<u32>) {
        let mut uncoloured = *p;
        self.spent.clear();
        let mut colour = 0usize;
        let mut start = 0usize;
        loop {
            while start < W && uncoloured[start] == 0 {
                start += 1;
            }
            if start == W {
                return;
            }
            colour += 1;
            let is_low = colour < kmin;
            if is_low {
                if self.low.len() < colour {
                    self.low.push([0; W]);
                }
                self.low[colour - 1] = [0; W];
                self.spent.push(false);
            }
            let mut q = uncoloured;
            let mut qs = start;
            loop {
                while qs < W && q[qs] == 0 {
                    qs += 1;
                }
                if qs == W {
                    break;
                }
                let bit = q[qs] & q[qs].wrapping_neg();
                let v = (qs << 6) | bit.trailing_zeros() as usize;
                uncoloured[qs] &= !bit;
                q[qs] &= !bit;
                if is_low {
                    self.low[colour - 1][qs] |= bit;
                } else if self.recolour(adj, v) || self.absorb(adj, v) {
                    continue;
                } else {
                    verts.push(v as u32);
                    colours.push(colour as u32);
                }
                // Same class only for graph neighbours of every member.
                let row = &adj[v];
                for j in 0..W {
                    q[j] &= row[j];
                }
            }
        }
    }

    /// Moves `v` into a low class if that takes displacing at most one
    /// member into a later low class.
    fn recolour(&mut self, adj: &[[u64; W]], v: usize) -> bool {
        let row_v = &adj[v];
        let classes = self.spent.len();
        for k1 in 0..classes {
            if self.spent[k1] {
                continue;
            }
            let mut x = self.low[k1];
            for j in 0..W {
                x[j] &= !row_v[j];
            }
            let clashes = few(&x);
            if clashes == 0 {
                set(&mut self.low[k1], v);
                return true;
            }
            if clashes == 1 {
                let clash = lowest(&x);
                let row_u = &adj[clash];
                for k2 in k1 + 1..classes {
                    if !self.spent[k2] && (0..W).all(|j| self.low[k2][j] & !row_u[j] == 0) {
                        clear(&mut self.low[k1], clash);
                        set(&mut self.low[k1], v);
                        set(&mut self.low[k2], clash);
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Looks for unspent low classes that cannot all contribute a vertex
    /// alongside `v`: taking `v` leaves one class a single compatible
    /// member, taking that one shrinks the others, and so on until some
    /// class has nothing left. Those classes and `v` together add no more
    /// to an independent set than the classes alone, so `v` needs no
    /// colour of its own. Spends the classes on success.
    fn absorb(&mut self, adj: &[[u64; W]], v: usize) -> bool {
        let classes = self.spent.len();
        let row_v = &adj[v];
        self.fit.resize(classes.max(self.fit.len()), [0; W]);
        self.mark.clear();
        self.queue.clear();
        self.chain.clear();
        for k in 0..classes {
            if self.spent[k] {
                self.mark.push(SPENT);
                continue;
            }
            let mut f = self.low[k];
            for j in 0..W {
                f[j] &= !row_v[j];
            }
            self.fit[k] = f;
            if few(&f) == 1 {
                self.queue.push(k);
                self.mark.push(QUEUED);
            } else {
                self.mark.push(FREE);
            }
        }
        let mut conflict = false;
        'propagate: while let Some(k) = self.queue.pop() {
            self.mark[k] = DONE;
            self.chain.push(k);
            let row_u = &adj[lowest(&self.fit[k])];
            for j in 0..classes {
                if self.mark[j] >= DONE {
                    continue;
                }
                let f = &mut self.fit[j];
                for i in 0..W {
                    f[i] &= !row_u[i];
                }
                match few(f) {
                    0 => {
                        self.chain.push(j);
                        conflict = true;
                        break 'propagate;
                    }
                    1 if self.mark[j] == FREE => {
                        self.queue.push(j);
                        self.mark[j] = QUEUED;
                    }
                    _ => {}
                }
            }
        }
        if conflict {
            for &k in &self.chain {
                self.spent[k] = true;
            }
        }
        conflict
    }
}

struct Engine<const W: usize> {
    /// Row `i` holds the graph neighbours of internal vertex `i`.
    adj: Vec<[u64; W]>,
    nodes: u64,
    budget: u64,
    best: Vec<usize>,
    /// Candidate set at each depth.
    cand: Vec<[u64; W]>,
    /// Branching vertices and their colours at each depth.
    verts: Vec<Vec<u32>>,
    colours: Vec<Vec<u32>>,
    bound: Bound<W>,
}

impl<const W: usize> Engine<W> {
    fn new(v: usize, edges: impl Iterator<Item = (usize, usize)>, budget: u64) -> Self {
        let mut adj = vec![[0u64; W]; v];
        for (a, b) in edges {
            set(&mut adj[a], b);
            set(&mut adj[b], a);
        }
        Engine {
            adj,
            nodes: 0,
            budget,
            best: Vec::new(),
            cand: Vec::new(),
            verts: Vec::new(),
            colours: Vec::new(),
            bound: Bound::new(),
        }
    }

    fn run(&mut self, mode: Mode, best_len: &mut usize, visit: &mut Visit<'_>) -> Result<ControlFlow<()>, BudgetHit> {
        let mut all = [0u64; W];
        for i in 0..self.adj.len() {
            set(&mut all, i);
        }
        if self.cand.is_empty() {
            self.cand.push(all);
        }
        self.cand[0] = all;
        self.best.clear();
        if self.adj.is_empty() {
            return Ok(match mode {
                Mode::Exactly(0) => visit(&[]),
                _ => ControlFlow::Continue(()),
            });
        }
        let mut cur = Vec::new();
        self.expand(0, mode, &mut cur, best_len, visit)
    }

    fn expand(
        &mut self,
        depth: usize,
        mode: Mode,
        cur: &mut Vec<usize>,
        best_len: &mut usize,
        visit: &mut Visit<'_>,
    ) -> Result<ControlFlow<()>, BudgetHit> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(BudgetHit);
        }
        if self.cand.len() <= depth + 1 {
            self.cand.push([0; W]);
        }
        if self.verts.len() <= depth {
            self.verts.push(Vec::new());
            self.colours.push(Vec::new());
        }
        let mut verts = std::mem::take(&mut self.verts[depth]);
        let mut colours = std::mem::take(&mut self.colours[depth]);
        verts.clear();
        colours.clear();
        // Branch only on vertices whose colour can still reach the target.
        let kmin = mode.target(*best_len).saturating_sub(cur.len()).max(1);
        self.bound.colour(&self.adj, &self.cand[depth], kmin, &mut verts, &mut colours);

        let mut flow = Ok(ControlFlow::Continue(()));
        for i in (0..verts.len()).rev() {
            if cur.len() + (colours[i] as usize) < mode.target(*best_len) {
                break;
            }
            let v = verts[i] as usize;
            clear(&mut self.cand[depth], v);
            cur.push(v);
            let step = self.step(depth, mode, cur, best_len, visit);
            cur.pop();
            if !matches!(step, Ok(ControlFlow::Continue(()))) {
                flow = step;
                break;
            }
        }
        self.verts[depth] = verts;
        self.colours[depth] = colours;
        flow
    }

    /// Handles the node reached by adding the last vertex of `cur`.
    fn step(
        &mut self,
        depth: usize,
        mode: Mode,
        cur: &mut Vec<usize>,
        best_len: &mut usize,
        visit: &mut Visit<'_>,
    ) -> Result<ControlFlow<()>, BudgetHit> {
        match mode {
            Mode::Exactly(t) if cur.len() == t => return Ok(visit(cur)),
            Mode::AtLeast(t) if cur.len() >= t => {
                self.best = cur.clone();
                *best_len = cur.len();
                return Ok(ControlFlow::Break(()));
            }
            _ => {}
        }
        let v = *cur.last().expect("step follows a push");
        let row = &self.adj[v];
        let (here, below) = self.cand.split_at_mut(depth + 1);
        let child = &mut below[0];
        for j in 0..W {
            child[j] = here[depth][j] & !row[j];
        }
        if is_empty(child) {
            if cur.len() > *best_len {
                *best_len = cur.len();
                self.best = cur.clone();
            }
            return Ok(ControlFlow::Continue(()));
        }
        self.expand(depth + 1, mode, cur, best_len, visit)
    }
}

macro_rules! widths {
    ($($variant:ident = $w:literal),* $(,)?) => {
        enum Inner {
            $($variant(Engine<$w>),)*
        }

        impl Inner {
            fn new(v: usize, edges: impl Iterator<Item = (usize, usize)>, budget: u64) -> Self {
                let words = v.div_ceil(64).max(1);
                $(if words <= $w {
                    return Inner::$variant(Engine::new(v, edges, budget));
                })*
                unreachable!("graph of {v} vertices is too large")
            }
        }

        macro_rules! with_engine {
            ($inner:expr, $e:ident => $body:expr) => {
                match $inner {
                    $(Inner::$variant($e) => $body,)*
                }
            };
        }
    };
}

widths!(
    W1 = 1, W2 = 2, W3 = 3, W4 = 4, W5 = 5, W6 = 6, W7 = 7, W8 = 8, W10 = 10, W12 = 12, W16 = 16,
    W24 = 24, W32 = 32, W64 = 64, W128 = 128, W256 = 256, W512 = 512,
);

pub(crate) struct GraphSearch {
    inner: Inner,
    /// Internal index to caller's vertex id.
    order: Vec<u32>,
}

/// Vertices in the order the search numbers them: repeatedly strip the
/// vertex with the most remaining graph neighbours and place it last.
fn strip_order(v: usize, edges: &[(u32, u32)]) -> Vec<u32> {
    let mut nb: Vec<Vec<u32>> = vec![Vec::new(); v];
    for &(a, b) in edges {
        nb[a as usize].push(b);
        nb[b as usize].push(a);
    }
    let mut degree: Vec<usize> = nb.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<(usize, Reverse<u32>)> = (0..v).map(|i| (degree[i], Reverse(i as u32))).collect();
    let mut gone = vec![false; v];
    let mut order = Vec::with_capacity(v);
    while let Some((d, Reverse(x))) = heap.pop() {
        let xi = x as usize;
        if gone[xi] || d != degree[xi] {
            continue;
        }
        gone[xi] = true;
        order.push(x);
        for &y in &nb[xi] {
            let yi = y as usize;
            if !gone[yi] {
                degree[yi] -= 1;
                heap.push((degree[yi], Reverse(y)));
            }
        }
    }
    order.reverse();
    order
}

impl GraphSearch {
    /// `v` must not exceed [`MAX_GRAPH_VERTICES`].
    pub(crate) fn new(v: usize, edges: &[(u32, u32)], budget: u64) -> Self {
        assert!(v <= MAX_GRAPH_VERTICES, "graph of {v} vertices is too large");
        let order = strip_order(v, edges);
        let mut position = vec![0usize; v];
        for (i, &x) in order.iter().enumerate() {
            position[x as usize] = i;
        }
        let internal = edges.iter().map(|&(a, b)| (position[a as usize], position[b as usize]));
        GraphSearch { inner: Inner::new(v, internal, budget), order }
    }

    /// Search nodes visited so far.
    pub(crate) fn nodes(&self) -> u64 {
        with_engine!(&self.inner, e => e.nodes)
    }

    fn external(&self, internal: &[usize]) -> Vec<u32> {
        let mut out: Vec<u32> = internal.iter().map(|&i| self.order[i]).collect();
        out.sort_unstable();
        out
    }

    fn best(&self) -> Option<Vec<u32>> {
        let best = with_engine!(&self.inner, e => &e.best);
        (!best.is_empty()).then(|| self.external(best))
    }

    /// A maximum independent set, or `None` if none beats `lower` vertices.
    pub(crate) fn maximize(&mut self, lower: usize) -> Result<Option<Vec<u32>>, BudgetHit> {
        let mut best_len = lower;
        let mut noop = |_: &[usize]| ControlFlow::Continue(());
        let _ = with_engine!(&mut self.inner, e => e.run(Mode::Maximize, &mut best_len, &mut noop))?;
        Ok(self.best())
    }

    /// Some independent set with at least `t` vertices.
    pub(crate) fn find_at_least(&mut self, t: usize) -> Result<Option<Vec<u32>>, BudgetHit> {
        if t == 0 {
            return Ok(Some(Vec::new()));
        }
        let mut best_len = t - 1;
        let mut noop = |_: &[usize]| ControlFlow::Continue(());
        let _ = with_engine!(&mut self.inner, e => e.run(Mode::AtLeast(t), &mut best_len, &mut noop))?;
        Ok(self.best())
    }

    /// Calls `f` on every independent set of exactly `t` vertices (sorted
    /// caller ids) until it breaks. Returns whether the walk finished.
    pub(crate) fn for_each_of_size(
        &mut self,
        t: usize,
        mut f: impl FnMut(&[u32]) -> ControlFlow<()>,
    ) -> Result<bool, BudgetHit> {
        if t == 0 {
            return Ok(f(&[]).is_continue());
        }
        let order = &self.order;
        let mut visit = |internal: &[usize]| {
            let mut ext: Vec<u32> = internal.iter().map(|&i| order[i]).collect();
            ext.sort_unstable();
            f(&ext)
        };
        let mut best_len = t - 1;
        let flow = with_engine!(&mut self.inner, e => e.run(Mode::Exactly(t), &mut best_len, &mut visit))?;
        Ok(flow.is_continue())
    }
}
