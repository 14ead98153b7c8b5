//! Exhaustive shortest-path oracles.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::rgg::{ConnectionParam, ConnectionStrategy, SampleSet, GOAL_ID, START_ID};
use crate::scene::Scene;
use crate::space::{dist, dist_sq, lerp, StateVec};

#[derive(Clone, Copy, Debug, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Fully materialized copy of the implicit graph, built by brute force.
#[derive(Clone, Debug)]
pub struct ExplicitGraph {
    states: Vec<StateVec>,
    adjacency: Vec<Vec<(usize, f64)>>,
    validity: HashMap<(usize, usize), bool>,
}

impl ExplicitGraph {
    /// Builds the symmetric neighbor graph over the alive states of `samples`,
    /// plus the start-goal edge.
    pub fn from_samples(samples: &SampleSet, strategy: &ConnectionStrategy) -> Self {
        let n = samples.len();
        let alive: Vec<usize> = samples.alive_ids().collect();
        let param = strategy.connection_param(alive.len());
        let mut adjacency = vec![Vec::new(); n];
        for &a in &alive {
            let mut others: Vec<(f64, usize)> = alive
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| (dist_sq(samples.state(a).as_slice(), samples.state(b).as_slice()), b))
                .collect();
            others.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let chosen: Vec<(f64, usize)> = match param {
                ConnectionParam::K(k) => others.into_iter().take(k).collect(),
                ConnectionParam::Radius(r) => others.into_iter().filter(|x| x.0 <= r * r).collect(),
            };
            for (d2, b) in chosen {
                let c = d2.sqrt();
                adjacency[a].push((b, c));
                adjacency[b].push((a, c));
            }
        }
        let c = dist(samples.state(START_ID).as_slice(), samples.state(GOAL_ID).as_slice());
        adjacency[START_ID].push((GOAL_ID, c));
        adjacency[GOAL_ID].push((START_ID, c));
        for list in &mut adjacency {
            list.sort_by_key(|x| x.0);
            list.dedup_by(|x, y| x.0 == y.0);
        }
        Self {
            states: (0..n).map(|i| samples.state(i).clone()).collect(),
            adjacency,
            validity: HashMap::new(),
        }
    }

    /// Graph with explicit weighted edges, for hand-built cases.
    pub fn from_edges(states: Vec<StateVec>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); states.len()];
        for &(a, b, c) in edges {
            if a >= states.len() || b >= states.len() {
                return Err(Error::InvalidArgument(format!("edge ({a},{b}) out of range")));
            }
            adjacency[a].push((b, c));
            adjacency[b].push((a, c));
        }
        Ok(Self {
            states,
            adjacency,
            validity: HashMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn neighbors(&self, id: usize) -> &[(usize, f64)] {
        &self.adjacency[id]
    }

    /// Checks and caches every edge against `scene`.
    pub fn check_edges(&mut self, scene: &Scene) {
        for a in 0..self.states.len() {
            for &(b, _) in &self.adjacency[a] {
                if a < b {
                    let ok = scene.edge_valid_full(&self.states[a], &self.states[b]);
                    self.validity.insert((a, b), ok);
                }
            }
        }
    }

    fn edge_ok(&self, a: usize, b: usize, scene: Option<&Scene>) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        match (self.validity.get(&key), scene) {
            (Some(&ok), _) => ok,
            (None, Some(scene)) => scene.edge_valid_full(&self.states[a], &self.states[b]),
            (None, None) => true,
        }
    }
}

/// Single-source shortest distances; infinite where unreachable.
pub fn dijkstra_rgg_oracle(graph: &ExplicitGraph, source: usize, collision_aware: bool, scene: &Scene) -> Vec<f64> {
    let scene = collision_aware.then_some(scene);
    let n = graph.len();
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[source] = 0.0;
    heap.push(Reverse(HeapItem(0.0, source)));
    while let Some(Reverse(HeapItem(d, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(u, c) in graph.neighbors(v) {
            if done[u] || d + c >= best[u] {
                continue;
            }
            if collision_aware && !graph.edge_ok(v, u, scene) {
                continue;
            }
            best[u] = d + c;
            heap.push(Reverse(HeapItem(d + c, u)));
        }
    }
    best
}

/// Uniform lattice over a planar scene.
#[derive(Clone, Debug)]
pub struct GridWorld {
    scene: Scene,
    resolution: usize,
    free: Vec<bool>,
}

impl GridWorld {
    /// `resolution` cells per axis.
    pub fn new(scene: Scene, resolution: usize) -> Result<Self> {
        if scene.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: scene.dim(),
            });
        }
        if resolution < 2 {
            return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
        }
        let mut w = Self {
            scene,
            resolution,
            free: Vec::new(),
        };
        w.free = (0..resolution * resolution)
            .map(|i| {
                let c = w.center(i % resolution, i / resolution);
                w.scene.is_free(&c)
            })
            .collect();
        Ok(w)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    fn cell_size(&self) -> [f64; 2] {
        let b = self.scene.bounds();
        [
            (b.upper()[0] - b.lower()[0]) / self.resolution as f64,
            (b.upper()[1] - b.lower()[1]) / self.resolution as f64,
        ]
    }

    fn center(&self, i: usize, j: usize) -> [f64; 2] {
        let b = self.scene.bounds();
        let h = self.cell_size();
        [b.lower()[0] + (i as f64 + 0.5) * h[0], b.lower()[1] + (j as f64 + 0.5) * h[1]]
    }

    fn cell_of(&self, x: &[f64]) -> (usize, usize) {
        let b = self.scene.bounds();
        let h = self.cell_size();
        let max = self.resolution - 1;
        let i = (((x[0] - b.lower()[0]) / h[0]).floor().max(0.0) as usize).min(max);
        let j = (((x[1] - b.lower()[1]) / h[1]).floor().max(0.0) as usize).min(max);
        (i, j)
    }

    pub fn is_free_cell(&self, i: usize, j: usize) -> bool {
        self.free[j * self.resolution + i]
    }

    fn line_of_sight(&self, a: &[f64], b: &[f64]) -> bool {
        let h = self.cell_size();
        let step = h[0].min(h[1]) / 4.0;
        let n = (dist(a, b) / step).ceil().max(1.0) as usize;
        (0..=n).all(|k| self.scene.is_free(&lerp(a, b, k as f64 / n as f64)))
    }
}

/// Shortest 8-connected lattice path between the cells of `start` and
/// `goal`, shortened by greedy line-of-sight. Infinite when disconnected.
pub fn grid_dijkstra_oracle(world: &GridWorld, start: &StateVec, goal: &StateVec) -> Result<f64> {
    if start.dim() != 2 || goal.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: start.dim().max(goal.dim()),
        });
    }
    let r = world.resolution;
    let (si, sj) = world.cell_of(start.as_slice());
    let (gi, gj) = world.cell_of(goal.as_slice());
    if !world.is_free_cell(si, sj) || !world.is_free_cell(gi, gj) {
        return Ok(f64::INFINITY);
    }
    let h = world.cell_size();
    let diag = (h[0] * h[0] + h[1] * h[1]).sqrt();
    let idx = |i: usize, j: usize| j * r + i;
    let mut best = vec![f64::INFINITY; r * r];
    let mut prev = vec![usize::MAX; r * r];
    let mut heap = BinaryHeap::new();
    best[idx(si, sj)] = 0.0;
    heap.push(Reverse(HeapItem(0.0, idx(si, sj))));
    let target = idx(gi, gj);
    while let Some(Reverse(HeapItem(d, v))) = heap.pop() {
        if d > best[v] {
            continue;
        }
        if v == target {
            break;
        }
        let (i, j) = ((v % r) as isize, (v / r) as isize);
        for di in -1isize..=1 {
            for dj in -1isize..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (i + di, j + dj);
                if ni < 0 || nj < 0 || ni >= r as isize || nj >= r as isize {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                if !world.is_free_cell(ni, nj) {
                    continue;
                }
                // no corner cutting
                if di != 0 && dj != 0
                    && (!world.is_free_cell((i + di) as usize, j as usize) || !world.is_free_cell(i as usize, (j + dj) as usize))
                {
                    continue;
                }
                let c = if di != 0 && dj != 0 {
                    diag
                } else if di != 0 {
                    h[0]
                } else {
                    h[1]
                };
                let u = idx(ni, nj);
                if d + c < best[u] {
                    best[u] = d + c;
                    prev[u] = v;
                    heap.push(Reverse(HeapItem(d + c, u)));
                }
            }
        }
    }
    if !best[target].is_finite() {
        return Ok(f64::INFINITY);
    }
    let mut cells = vec![target];
    while *cells.last().unwrap() != idx(si, sj) {
        cells.push(prev[*cells.last().unwrap()]);
    }
    cells.reverse();
    let mut points: Vec<[f64; 2]> = vec![[start[0], start[1]]];
    points.extend(cells.iter().map(|&c| world.center(c % r, c / r)));
    points.push([goal[0], goal[1]]);

    let mut total = 0.0;
    let mut anchor = 0;
    let mut j = 1;
    while anchor < points.len() - 1 {
        while j + 1 < points.len() && world.line_of_sight(&points[anchor], &points[j + 1]) {
            j += 1;
        }
        total += dist(&points[anchor], &points[j]);
        anchor = j;
        j += 1;
    }
    Ok(total)
}
