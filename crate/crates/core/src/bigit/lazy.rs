//! Lazy meet-in-the-middle search and the guidance heuristic derived from it.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use crate::rgg::{Rgg, GOAL_ID, START_ID};
use crate::scene::{Scene, SparseCheckLedger};
use crate::search::{edge_key, Direction, INF};
use crate::space::dist;

use super::{mm_priority, stop_condition};

#[derive(Clone, Copy, Debug, PartialEq)]
struct Open {
    pr: f64,
    g: f64,
    id: usize,
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pr
            .total_cmp(&other.pr)
            .then(self.g.total_cmp(&other.g))
            .then(self.id.cmp(&other.id))
    }
}

/// Outcome of a lazy search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LazyOutcome {
    Found { meet: usize, cost: f64 },
    NoPath,
}

/// Bidirectional search over the implicit graph with edge checks deferred.
#[derive(Clone, Debug)]
pub struct LazySearch {
    g: [Vec<f64>; 2],
    parent: [Vec<Option<usize>>; 2],
    expanded: [Vec<bool>; 2],
    open: [BinaryHeap<Reverse<Open>>; 2],
    invalid: HashSet<(usize, usize)>,
    meeting: BTreeSet<usize>,
    u_lazy: f64,
    x_m: Option<usize>,
}

fn root(d: Direction) -> usize {
    match d {
        Direction::Forward => START_ID,
        Direction::Backward => GOAL_ID,
    }
}

fn lower_bound(rgg: &Rgg, d: Direction, id: usize) -> f64 {
    let s = rgg.samples();
    dist(s.coords(id), s.coords(root(d.opposite())))
}

impl LazySearch {
    pub fn new(rgg: &Rgg) -> Self {
        let n = rgg.samples().len();
        let mut s = Self {
            g: [vec![INF; n], vec![INF; n]],
            parent: [vec![None; n], vec![None; n]],
            expanded: [vec![false; n], vec![false; n]],
            open: [BinaryHeap::new(), BinaryHeap::new()],
            invalid: HashSet::new(),
            meeting: BTreeSet::new(),
            u_lazy: INF,
            x_m: None,
        };
        for d in Direction::BOTH {
            let r = root(d);
            s.g[d.index()][r] = 0.0;
            s.push(rgg, d, r);
        }
        s.note_meet(START_ID);
        s.note_meet(GOAL_ID);
        s
    }

    pub fn g(&self, d: Direction, id: usize) -> f64 {
        self.g[d.index()].get(id).copied().unwrap_or(INF)
    }

    pub fn parent(&self, d: Direction, id: usize) -> Option<usize> {
        self.parent[d.index()].get(id).copied().flatten()
    }

    pub fn expanded(&self, d: Direction, id: usize) -> bool {
        self.expanded[d.index()].get(id).copied().unwrap_or(false)
    }

    pub fn u_lazy(&self) -> f64 {
        self.u_lazy
    }

    pub fn meeting_set(&self) -> &BTreeSet<usize> {
        &self.meeting
    }

    pub fn priority(&self, rgg: &Rgg, d: Direction, id: usize) -> f64 {
        mm_priority(self.g(d, id), lower_bound(rgg, d, id))
    }

    fn push(&mut self, rgg: &Rgg, d: Direction, id: usize) {
        let g = self.g[d.index()][id];
        self.open[d.index()].push(Reverse(Open {
            pr: mm_priority(g, lower_bound(rgg, d, id)),
            g,
            id,
        }));
    }

    fn note_meet(&mut self, id: usize) {
        let c = self.g[0][id] + self.g[1][id];
        if c.is_finite() {
            self.meeting.insert(id);
            if c < self.u_lazy {
                self.u_lazy = c;
                self.x_m = Some(id);
            }
        }
    }

    /// Drops stale heads and returns the minimum live priority.
    fn prmin(&mut self, d: Direction) -> f64 {
        let i = d.index();
        while let Some(Reverse(top)) = self.open[i].peek() {
            if top.g == self.g[i][top.id] && !self.expanded[i][top.id] {
                return top.pr;
            }
            self.open[i].pop();
        }
        INF
    }

    fn expand(&mut self, rgg: &Rgg, d: Direction) {
        let i = d.index();
        let Some(Reverse(top)) = self.open[i].pop() else { return };
        let x = top.id;
        self.expanded[i][x] = true;
        for e in rgg.adjacent(x) {
            if self.invalid.contains(&edge_key(x, e.to)) {
                continue;
            }
            let cand = top.g + e.cost;
            if cand < self.g[i][e.to] {
                self.g[i][e.to] = cand;
                self.parent[i][e.to] = Some(x);
                self.expanded[i][e.to] = false;
                self.push(rgg, d, e.to);
                self.note_meet(e.to);
            }
        }
        self.note_meet(x);
    }

    /// Runs until the stop rule accepts a candidate whose meeting edges pass
    /// the sparse check, or the graph is exhausted.
    pub fn run(&mut self, rgg: &Rgg, scene: &Scene, ledger: &mut SparseCheckLedger, level: u32) -> LazyOutcome {
        loop {
            let pf = self.prmin(Direction::Forward);
            let pb = self.prmin(Direction::Backward);
            if stop_condition(self.u_lazy, pf, pb) {
                let Some(x_m) = self.x_m.filter(|_| self.u_lazy.is_finite()) else {
                    return LazyOutcome::NoPath;
                };
                let mut ok = true;
                for d in Direction::BOTH {
                    if let Some(p) = self.parent(d, x_m) {
                        let s = rgg.samples();
                        if !scene.edge_check_sparse(ledger, p, x_m, s.state(p), s.state(x_m), level) {
                            self.invalidate(rgg, p, x_m);
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    return LazyOutcome::Found {
                        meet: x_m,
                        cost: self.u_lazy,
                    };
                }
                continue;
            }
            let d = if pf <= pb {
                Direction::Forward
            } else {
                Direction::Backward
            };
            self.expand(rgg, d);
        }
    }

    /// Removes edge `a`-`b` and repairs every lazy subtree that used it.
    fn invalidate(&mut self, rgg: &Rgg, a: usize, b: usize) {
        self.invalid.insert(edge_key(a, b));
        for d in Direction::BOTH {
            for (p, c) in [(a, b), (b, a)] {
                if self.parent(d, c) == Some(p) {
                    self.reset_subtree(rgg, d, c);
                }
            }
        }
        self.u_lazy = INF;
        self.x_m = None;
        let members: Vec<usize> = self.meeting.iter().copied().collect();
        for id in members {
            let c = self.g[0][id] + self.g[1][id];
            if c < self.u_lazy {
                self.u_lazy = c;
                self.x_m = Some(id);
            }
        }
    }

    fn reset_subtree(&mut self, rgg: &Rgg, d: Direction, top: usize) {
        let i = d.index();
        let n = self.g[i].len();
        let mut children = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = self.parent[i][v] {
                children[p].push(v);
            }
        }
        let mut reset = Vec::new();
        let mut in_reset = vec![false; n];
        let mut stack = vec![top];
        while let Some(v) = stack.pop() {
            if in_reset[v] {
                continue;
            }
            in_reset[v] = true;
            reset.push(v);
            stack.extend(children[v].iter().copied());
        }
        for &v in &reset {
            self.g[i][v] = INF;
            self.parent[i][v] = None;
            self.expanded[i][v] = false;
        }
        for &v in &reset {
            for e in rgg.adjacent(v) {
                let u = e.to;
                if in_reset[u] || !self.expanded[i][u] || self.invalid.contains(&edge_key(u, v)) {
                    continue;
                }
                let cand = self.g[i][u] + e.cost;
                if cand < self.g[i][v] {
                    self.g[i][v] = cand;
                    self.parent[i][v] = Some(u);
                }
            }
            if self.g[i][v].is_finite() {
                self.push(rgg, d, v);
            }
        }
    }

    /// Cost-to-go toward the opposite root for direction `d`, by Dijkstra
    /// over the lazy graph seeded from the meeting set and the opposite root.
    /// Entries whose key plus distance to the own root exceed the neighbor
    /// bound of `x_m` are dropped; the search ends once the own root settles.
    ///
    /// Returns `(id, value)` for every settled state.
    pub fn guidance(&self, rgg: &Rgg, d: Direction, x_m: usize, seeds_all: bool) -> Vec<(usize, f64)> {
        let s = rgg.samples();
        let i = d.index();
        let o = 1 - i;
        let own_root = root(d);
        let mut bound = f64::NEG_INFINITY;
        for e in rgg.adjacent(x_m) {
            if self.parent[i][e.to].is_none() {
                continue;
            }
            let g_other = if self.g[o][e.to].is_finite() {
                self.g[o][e.to]
            } else {
                self.g[o][x_m] + e.cost
            };
            bound = bound.max(g_other + dist(s.coords(e.to), s.coords(own_root)));
        }
        bound = bound.max(self.u_lazy);
        let seeds: Vec<usize> = if seeds_all {
            self.meeting
                .iter()
                .copied()
                .filter(|&m| self.g[0][m].is_finite() && self.g[1][m].is_finite())
                .collect()
        } else {
            vec![x_m]
        };
        let mut seeds = seeds;
        seeds.push(root(d.opposite()));
        let out = self.bounded_dijkstra(rgg, d, &seeds, bound);
        if out.iter().any(|&(id, _)| id == own_root) {
            out
        } else {
            self.bounded_dijkstra(rgg, d, &seeds, INF)
        }
    }

    fn bounded_dijkstra(&self, rgg: &Rgg, d: Direction, seeds: &[usize], bound: f64) -> Vec<(usize, f64)> {
        let s = rgg.samples();
        let o = d.opposite().index();
        let own_root = root(d);
        let n = self.g[o].len();
        let mut best = vec![INF; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        let admit = |id: usize, key: f64| key + dist(s.coords(id), s.coords(own_root)) <= bound;
        for &m in seeds {
            let key = self.g[o][m];
            if admit(m, key) && key < best[m] {
                best[m] = key;
                heap.push(Reverse(Open { pr: key, g: key, id: m }));
            }
        }
        let mut out = Vec::new();
        while let Some(Reverse(top)) = heap.pop() {
            let v = top.id;
            if done[v] || top.pr > best[v] {
                continue;
            }
            done[v] = true;
            out.push((v, top.pr));
            if v == own_root {
                break;
            }
            for e in rgg.adjacent(v) {
                let u = e.to;
                if done[u] || self.invalid.contains(&edge_key(u, v)) {
                    continue;
                }
                let key = top.pr + e.cost;
                if key < best[u] && admit(u, key) {
                    best[u] = key;
                    heap.push(Reverse(Open { pr: key, g: key, id: u }));
                }
            }
        }
        out
    }
}
