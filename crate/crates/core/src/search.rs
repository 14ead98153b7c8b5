//! Search trees, edge queues and the directional edge search shared by the
//! planners.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::rgg::Rgg;
use crate::scene::Scene;
use crate::space::dist;

pub(crate) const INF: f64 = f64::INFINITY;

/// Search direction. Forward grows from the start, backward from the goal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn index(self) -> usize {
        match self {
            Direction::Forward => 0,
            Direction::Backward => 1,
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    pub const BOTH: [Direction; 2] = [Direction::Forward, Direction::Backward];
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct QueueEntry {
    key: f64,
    tie: f64,
    u: usize,
    v: usize,
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.tie.total_cmp(&other.tie))
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
    }
}

/// Min-priority queue of directed edges with at most one entry per edge.
///
/// Entries order by (key, tie, source id, target id). Pushing an edge that is
/// already queued keeps the lower key.
#[derive(Clone, Debug, Default)]
pub struct EdgeQueue {
    set: BTreeSet<QueueEntry>,
    index: HashMap<(usize, usize), (QueueEntry, f64)>,
}

/// Popped or peeked edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueuedEdge {
    pub source: usize,
    pub target: usize,
    /// Ordering key.
    pub key: f64,
    /// Unnormalized `g + c_hat + h`; equals `key` unless keys are normalized.
    pub raw_key: f64,
}

impl EdgeQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn clear(&mut self) {
        self.set.clear();
        self.index.clear();
    }

    /// Inserts the edge, or lowers its key if already present.
    pub fn push(&mut self, u: usize, v: usize, key: f64, tie: f64, raw_key: f64) {
        let entry = QueueEntry { key, tie, u, v };
        match self.index.get(&(u, v)) {
            Some((old, _)) if *old <= entry => {}
            Some((old, _)) => {
                let old = *old;
                self.set.remove(&old);
                self.set.insert(entry);
                self.index.insert((u, v), (entry, raw_key));
            }
            None => {
                self.set.insert(entry);
                self.index.insert((u, v), (entry, raw_key));
            }
        }
    }

    pub fn peek(&self) -> Option<QueuedEdge> {
        self.set.first().map(|e| self.view(e))
    }

    pub fn pop(&mut self) -> Option<QueuedEdge> {
        let e = self.set.pop_first()?;
        let out = self.view(&e);
        self.index.remove(&(e.u, e.v));
        Some(out)
    }

    fn view(&self, e: &QueueEntry) -> QueuedEdge {
        QueuedEdge {
            source: e.u,
            target: e.v,
            key: e.key,
            raw_key: self.index[&(e.u, e.v)].1,
        }
    }

    /// Raw key of the head, infinite when empty.
    pub fn min_key(&self) -> f64 {
        self.peek().map_or(INF, |e| e.raw_key)
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.index.contains_key(&(u, v))
    }
}

/// Explicit search tree rooted at one query state.
///
/// `g` is the cost-to-come through the tree (infinite off-tree). `g_hat` is the
/// best cost-to-come offered by a queued edge, never above `g`.
#[derive(Clone, Debug)]
pub struct SearchTree {
    root: usize,
    g: Vec<f64>,
    g_hat: Vec<f64>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl SearchTree {
    pub fn new(root: usize, len: usize) -> Self {
        let mut t = Self {
            root,
            g: Vec::new(),
            g_hat: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
        };
        t.resize(len);
        t.g[root] = 0.0;
        t.g_hat[root] = 0.0;
        t
    }

    pub fn resize(&mut self, len: usize) {
        if len > self.g.len() {
            self.g.resize(len, INF);
            self.g_hat.resize(len, INF);
            self.parent.resize(len, None);
            self.children.resize(len, Vec::new());
        }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn g(&self, id: usize) -> f64 {
        self.g.get(id).copied().unwrap_or(INF)
    }

    pub fn g_hat(&self, id: usize) -> f64 {
        self.g_hat.get(id).copied().unwrap_or(INF)
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.parent.get(id).copied().flatten()
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    pub fn contains(&self, id: usize) -> bool {
        self.g(id).is_finite()
    }

    pub fn len(&self) -> usize {
        self.g.iter().filter(|g| g.is_finite()).count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn lower_g_hat(&mut self, id: usize, value: f64) {
        if value < self.g_hat[id] {
            self.g_hat[id] = value;
        }
    }

    /// Forgets queued offers: `g_hat` falls back to `g`.
    pub(crate) fn reset_g_hat(&mut self, id: usize) {
        self.g_hat[id] = self.g[id];
    }

    pub(crate) fn reset_all_g_hat(&mut self) {
        self.g_hat.clone_from(&self.g);
    }

    /// Makes `parent` the parent of `child` at cost `g_child` and propagates
    /// the change through the subtree. Returns every id whose cost changed.
    pub(crate) fn attach(&mut self, child: usize, parent: usize, g_child: f64, rgg: &Rgg) -> Vec<usize> {
        if let Some(old) = self.parent[child] {
            self.children[old].retain(|&c| c != child);
        }
        self.parent[child] = Some(parent);
        self.children[parent].push(child);
        self.g[child] = g_child;
        self.lower_g_hat(child, g_child);
        let mut changed = vec![child];
        let mut stack = vec![child];
        while let Some(v) = stack.pop() {
            for i in 0..self.children[v].len() {
                let c = self.children[v][i];
                let g = self.g[v] + rgg.cost(v, c);
                self.g[c] = g;
                self.lower_g_hat(c, g);
                changed.push(c);
                stack.push(c);
            }
        }
        changed
    }

    /// Removes dead vertices and detaches everything below them.
    pub(crate) fn remove_dead(&mut self, alive: impl Fn(usize) -> bool) -> usize {
        let mut removed = 0;
        let mut stack = Vec::new();
        for id in 0..self.g.len() {
            if self.g[id].is_finite() && id != self.root && !alive(id) {
                stack.push(id);
            }
        }
        while let Some(v) = stack.pop() {
            if !self.g[v].is_finite() {
                continue;
            }
            if let Some(p) = self.parent[v].take() {
                self.children[p].retain(|&c| c != v);
            }
            self.g[v] = INF;
            self.g_hat[v] = INF;
            removed += 1;
            stack.extend(std::mem::take(&mut self.children[v]));
        }
        removed
    }

    /// Ids from the root to `id`, inclusive.
    pub fn branch(&self, id: usize) -> Result<Vec<usize>> {
        let mut out = vec![id];
        let mut cur = id;
        while cur != self.root {
            cur = self.parent(cur).ok_or_else(|| {
                Error::Internal(format!("vertex {cur} has no parent on the way to root {}", self.root))
            })?;
            out.push(cur);
            if out.len() > self.g.len() + 1 {
                return Err(Error::Internal("cycle in search tree".into()));
            }
        }
        out.reverse();
        Ok(out)
    }
}

/// Admission rule for edges entering a queue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    /// `key <= U_E` or `g(source) <= U_E / 2`.
    Bidirectional,
    /// `key < U_E`.
    Strict,
}

/// One direction of a guided edge search: a tree, its edge queue and its
/// cost-to-go heuristic.
#[derive(Clone, Debug)]
pub struct DirectionalSearch {
    pub tree: SearchTree,
    pub queue: EdgeQueue,
    /// Guidance heuristic, infinite where unset.
    pub h_guid: Vec<f64>,
    /// The root of the opposite direction.
    pub target: usize,
    pub gate: Gate,
    /// When set, keys of guided targets are divided by this cost and
    /// Euclidean keys by the focal distance.
    pub normalize: Option<(f64, f64)>,
}

/// What processing a popped edge did.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeOutcome {
    Discarded,
    TreeEdge,
    Invalid,
    /// The target joined or was rewired; ids whose cost changed.
    Improved(Vec<usize>),
}

impl DirectionalSearch {
    pub fn new(root: usize, target: usize, len: usize, gate: Gate) -> Self {
        Self {
            tree: SearchTree::new(root, len),
            queue: EdgeQueue::new(),
            h_guid: vec![INF; len],
            target,
            gate,
            normalize: None,
        }
    }

    pub fn resize(&mut self, len: usize) {
        self.tree.resize(len);
        if len > self.h_guid.len() {
            self.h_guid.resize(len, INF);
        }
    }

    pub fn heuristic(&self, rgg: &Rgg, id: usize) -> f64 {
        let h = self.h_guid[id];
        if h.is_finite() {
            h
        } else {
            dist(rgg.samples().coords(id), rgg.samples().coords(self.target))
        }
    }

    fn admits(&self, key: f64, g_source: f64, u_e: f64) -> bool {
        match self.gate {
            Gate::Bidirectional => key <= u_e || g_source <= u_e / 2.0,
            Gate::Strict => key < u_e,
        }
    }

    fn order_key(&self, raw: f64, target: usize) -> f64 {
        match self.normalize {
            None => raw,
            Some((candidate, c_min)) => {
                if self.h_guid[target].is_finite() {
                    raw / candidate
                } else if c_min > 0.0 {
                    raw / c_min
                } else {
                    raw
                }
            }
        }
    }

    /// Tries to enqueue the single edge `source -> target`.
    fn offer(&mut self, rgg: &Rgg, source: usize, target: usize, cost: f64, u_e: f64) -> bool {
        let g = self.tree.g(source);
        if !g.is_finite() {
            return false;
        }
        let tree_edge = self.tree.parent(target) == Some(source);
        let cand = g + cost;
        if !tree_edge && !(self.tree.g_hat(target) > cand) {
            return false;
        }
        let raw = cand + self.heuristic(rgg, target);
        if !self.admits(raw, g, u_e) {
            return false;
        }
        let key = self.order_key(raw, target);
        self.queue.push(source, target, key, cand, raw);
        if !tree_edge {
            self.tree.lower_g_hat(target, cand);
        }
        true
    }

    /// Enqueues every admissible outgoing edge of `x`. Returns how many.
    pub fn expand(&mut self, rgg: &Rgg, invalid: &HashSet<(usize, usize)>, x: usize, u_e: f64) -> usize {
        let mut pushed = 0;
        for e in rgg.adjacent(x) {
            if invalid.contains(&edge_key(x, e.to)) {
                continue;
            }
            if self.offer(rgg, x, e.to, e.cost, u_e) {
                pushed += 1;
            }
        }
        // tree edges that fell out of the neighbor relation after a rebuild
        for i in 0..self.tree.children(x).len() {
            let c = self.tree.children(x)[i];
            if !self.queue.contains(x, c) && self.offer(rgg, x, c, rgg.cost(x, c), u_e) {
                pushed += 1;
            }
        }
        pushed
    }

    /// Handles one popped edge: expansion of tree edges, collision checking
    /// and insertion or rewiring otherwise.
    pub fn process(
        &mut self,
        rgg: &Rgg,
        scene: &Scene,
        invalid: &mut HashSet<(usize, usize)>,
        edge: QueuedEdge,
        u_e: f64,
    ) -> EdgeOutcome {
        let (x, y) = (edge.source, edge.target);
        let samples = rgg.samples();
        if !samples.is_alive(x) || !samples.is_alive(y) || !self.tree.contains(x) {
            return EdgeOutcome::Discarded;
        }
        if self.tree.parent(y) == Some(x) {
            self.expand(rgg, invalid, y, u_e);
            return EdgeOutcome::TreeEdge;
        }
        let cost = rgg.cost(x, y);
        let cand = self.tree.g(x) + cost;
        if !(cand < self.tree.g(y)) {
            return EdgeOutcome::Discarded;
        }
        let known_bad = invalid.contains(&edge_key(x, y));
        if known_bad || !scene.edge_free(samples.coords(x), samples.coords(y)) {
            invalid.insert(edge_key(x, y));
            // The failed offer may have hidden costlier valid ones; re-offer
            // from every tree neighbor.
            self.tree.reset_g_hat(y);
            for e in rgg.adjacent(y) {
                if e.to != x && !invalid.contains(&edge_key(e.to, y)) {
                    self.offer(rgg, e.to, y, e.cost, u_e);
                }
            }
            return EdgeOutcome::Invalid;
        }
        let changed = self.tree.attach(y, x, cand, rgg);
        self.expand(rgg, invalid, y, u_e);
        EdgeOutcome::Improved(changed)
    }

    /// Clears the queue and offers, and re-expands the root.
    pub fn restart(&mut self, rgg: &Rgg, invalid: &HashSet<(usize, usize)>, u_e: f64) {
        self.queue.clear();
        self.tree.reset_all_g_hat();
        let root = self.tree.root();
        self.expand(rgg, invalid, root, u_e);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queue_orders_and_decreases_keys() {
        let mut q = EdgeQueue::new();
        q.push(0, 1, 2.0, 0.5, 2.0);
        q.push(0, 2, 1.0, 0.5, 1.0);
        q.push(3, 4, 1.0, 0.2, 1.0);
        q.push(0, 1, 0.5, 0.1, 0.5);
        q.push(0, 2, 5.0, 0.1, 5.0); // higher: ignored
        assert_eq!(q.len(), 3);
        let order: Vec<(usize, usize)> = std::iter::from_fn(|| q.pop()).map(|e| (e.source, e.target)).collect();
        assert_eq!(order, vec![(0, 1), (3, 4), (0, 2)]);
        assert_eq!(q.min_key(), INF);
    }

    #[test]
    fn queue_ties_break_on_ids() {
        let mut q = EdgeQueue::new();
        q.push(5, 1, 1.0, 0.3, 1.0);
        q.push(2, 9, 1.0, 0.3, 1.0);
        q.push(2, 3, 1.0, 0.3, 1.0);
        let e = q.pop().unwrap();
        assert_eq!((e.source, e.target), (2, 3));
    }
}
