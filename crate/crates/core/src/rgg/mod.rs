//! Batch sample store and the implicit random geometric graph over it.

mod kdtree;

pub use kdtree::NeighborIndex;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scene::Scene;
use crate::space::{dist, sample_informed, unit_ball_volume, InformedSampler, RngStream, StateVec};

pub const START_ID: usize = 0;
pub const GOAL_ID: usize = 1;

const MAX_CONSECUTIVE_REJECTIONS: usize = 1_000_000;

/// Sampled states. Id 0 is the start, id 1 the goal. Pruned ids stay as
/// tombstones and are never reused.
#[derive(Clone, Debug)]
pub struct SampleSet {
    states: Vec<StateVec>,
    batch_of: Vec<usize>,
    alive: Vec<bool>,
    alive_count: usize,
}

impl SampleSet {
    pub fn new(start: StateVec, goal: StateVec) -> Result<Self> {
        check_dim(start.dim(), goal.dim())?;
        Ok(Self {
            states: vec![start, goal],
            batch_of: vec![0, 0],
            alive: vec![true, true],
            alive_count: 2,
        })
    }

    pub fn dim(&self) -> usize {
        self.states[START_ID].dim()
    }

    /// Total ids ever issued, dead or alive.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    pub fn state(&self, id: usize) -> &StateVec {
        &self.states[id]
    }

    pub(crate) fn coords(&self, id: usize) -> &[f64] {
        self.states[id].as_slice()
    }

    pub fn start(&self) -> &StateVec {
        &self.states[START_ID]
    }

    pub fn goal(&self) -> &StateVec {
        &self.states[GOAL_ID]
    }

    pub fn is_alive(&self, id: usize) -> bool {
        self.alive[id]
    }

    pub fn batch_of(&self, id: usize) -> usize {
        self.batch_of[id]
    }

    pub fn alive_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states.len()).filter(|&i| self.alive[i])
    }

    /// Appends a state without validity checks.
    pub fn push(&mut self, state: StateVec, batch: usize) -> Result<usize> {
        check_dim(self.dim(), state.dim())?;
        self.states.push(state);
        self.batch_of.push(batch);
        self.alive.push(true);
        self.alive_count += 1;
        Ok(self.states.len() - 1)
    }

    /// Lower bound on the cost of any start-goal path through `id`.
    pub fn focal_sum(&self, id: usize) -> f64 {
        let x = self.coords(id);
        dist(x, self.coords(START_ID)) + dist(x, self.coords(GOAL_ID))
    }

    /// Adds `m` valid states drawn from the informed set of `u_e`.
    pub fn add_batch(
        &mut self,
        m: usize,
        u_e: f64,
        scene: &Scene,
        batch: usize,
        rng: &mut RngStream,
    ) -> Result<Vec<usize>> {
        if m == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        check_dim(scene.dim(), self.dim())?;
        let c_min = dist(self.coords(START_ID), self.coords(GOAL_ID));
        let sampler = InformedSampler::new(self.start(), self.goal(), u_e.max(c_min))?;
        let mut ids = Vec::with_capacity(m);
        let mut rejections = 0;
        while ids.len() < m {
            let x = sample_informed(&sampler, scene.bounds(), rng)?;
            if scene.is_free(x.as_slice()) {
                rejections = 0;
                ids.push(self.push(x, batch)?);
            } else {
                rejections += 1;
                if rejections >= MAX_CONSECUTIVE_REJECTIONS {
                    return Err(Error::InfeasibleSampling { attempts: rejections });
                }
            }
        }
        Ok(ids)
    }

    /// Kills every state whose focal sum exceeds `u_e`. Start and goal survive.
    pub fn prune(&mut self, u_e: f64) -> usize {
        self.prune_protected(u_e, |_| false)
    }

    /// As [`SampleSet::prune`], additionally sparing ids for which `keep`
    /// holds.
    pub fn prune_protected(&mut self, u_e: f64, keep: impl Fn(usize) -> bool) -> usize {
        let mut removed = 0;
        for id in 2..self.states.len() {
            if self.alive[id] && self.focal_sum(id) > u_e && !keep(id) {
                self.alive[id] = false;
                self.alive_count -= 1;
                removed += 1;
            }
        }
        removed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectionMode {
    Knn,
    RDisc,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConnectionParam {
    K(usize),
    Radius(f64),
}

/// How samples connect to form the implicit graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionStrategy {
    pub mode: ConnectionMode,
    pub eta: f64,
    pub dim: usize,
    /// Lebesgue measure of the sampled region, used by r-disc.
    pub measure: f64,
}

impl ConnectionStrategy {
    pub fn new(mode: ConnectionMode, eta: f64, dim: usize, measure: f64) -> Result<Self> {
        if !(eta >= 1.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!("eta must be at least 1, got {eta}")));
        }
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {dim}")));
        }
        Ok(Self {
            mode,
            eta,
            dim,
            measure,
        })
    }

    pub fn unit_ball_volume(&self) -> f64 {
        unit_ball_volume(self.dim)
    }

    /// Neighbor count or radius for a graph of `q` states.
    pub fn connection_param(&self, q: usize) -> ConnectionParam {
        let q = q.max(2) as f64;
        let n = self.dim as f64;
        match self.mode {
            ConnectionMode::Knn => {
                let k = self.eta * std::f64::consts::E * (1.0 + 1.0 / n) * q.ln();
                ConnectionParam::K(k.ceil() as usize)
            }
            ConnectionMode::RDisc => {
                let inner = (1.0 + 1.0 / n) * (self.measure / self.unit_ball_volume()) * (q.ln() / q);
                ConnectionParam::Radius(self.eta * 2.0 * inner.powf(1.0 / n))
            }
        }
    }
}

/// Weighted implicit-graph edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub to: usize,
    pub cost: f64,
}

/// Samples plus the per-batch neighbor structure.
///
/// The planners use the symmetric closure of the neighbor relation: `u` and
/// `v` are adjacent when either lies in the other's neighbor set. Start and
/// goal are always adjacent.
pub struct Rgg {
    samples: SampleSet,
    strategy: ConnectionStrategy,
    index: NeighborIndex,
    param: ConnectionParam,
    adjacency: Vec<Vec<Edge>>,
}

impl Rgg {
    pub fn new(samples: SampleSet, strategy: ConnectionStrategy) -> Result<Self> {
        check_dim(strategy.dim, samples.dim())?;
        let mut rgg = Self {
            samples,
            strategy,
            index: NeighborIndex::build(0, std::iter::empty()),
            param: ConnectionParam::K(0),
            adjacency: Vec::new(),
        };
        rgg.rebuild();
        Ok(rgg)
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut SampleSet {
        &mut self.samples
    }

    pub fn strategy(&self) -> &ConnectionStrategy {
        &self.strategy
    }

    pub fn set_measure(&mut self, measure: f64) {
        self.strategy.measure = measure;
    }

    pub fn param(&self) -> ConnectionParam {
        self.param
    }

    /// Recomputes the index and adjacency over the alive states.
    pub fn rebuild(&mut self) {
        let samples = &self.samples;
        self.index = NeighborIndex::build(
            samples.dim(),
            samples.alive_ids().map(|id| (id, samples.coords(id))),
        );
        self.param = self.strategy.connection_param(samples.alive_count());
        let mut adjacency: Vec<Vec<Edge>> = vec![Vec::new(); samples.len()];
        for id in samples.alive_ids() {
            for (other, d2) in self.query(id) {
                let cost = d2.sqrt();
                adjacency[id].push(Edge { to: other, cost });
                adjacency[other].push(Edge { to: id, cost });
            }
        }
        // the direct query edge is always a candidate
        let cost = dist(samples.coords(START_ID), samples.coords(GOAL_ID));
        adjacency[START_ID].push(Edge { to: GOAL_ID, cost });
        adjacency[GOAL_ID].push(Edge { to: START_ID, cost });
        for list in &mut adjacency {
            list.sort_by_key(|a| a.to);
            list.dedup_by(|a, b| a.to == b.to);
        }
        self.adjacency = adjacency;
    }

    fn query(&self, id: usize) -> Vec<(usize, f64)> {
        let x = self.samples.coords(id);
        match self.param {
            ConnectionParam::K(k) => self.index.knn(x, k, Some(id)),
            ConnectionParam::Radius(r) => self.index.within(x, r, Some(id)),
        }
    }

    /// Raw neighbor query: the k nearest alive states, or all within r,
    /// excluding `id` itself, ordered by (distance, id).
    pub fn neighbors(&self, id: usize) -> Vec<usize> {
        self.query(id).into_iter().map(|(i, _)| i).collect()
    }

    /// Symmetric adjacency of `id` in the current graph, ordered by id.
    pub fn adjacent(&self, id: usize) -> &[Edge] {
        self.adjacency.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn cost(&self, a: usize, b: usize) -> f64 {
        dist(self.samples.coords(a), self.samples.coords(b))
    }

    /// Draws a batch and rebuilds the graph.
    pub fn add_batch(
        &mut self,
        m: usize,
        u_e: f64,
        scene: &Scene,
        batch: usize,
        rng: &mut RngStream,
    ) -> Result<Vec<usize>> {
        let ids = self.samples.add_batch(m, u_e, scene, batch, rng)?;
        self.rebuild();
        Ok(ids)
    }

    /// Appends externally chosen states and rebuilds the graph.
    pub fn add_states(&mut self, states: Vec<StateVec>, batch: usize) -> Result<Vec<usize>> {
        let ids = states
            .into_iter()
            .map(|s| self.samples.push(s, batch))
            .collect::<Result<Vec<_>>>()?;
        self.rebuild();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Aabb, Obstacles};
    use crate::space::{sample_uniform, ProblemBounds};

    fn sv(c: &[f64]) -> StateVec {
        StateVec::from_slice(c).unwrap()
    }

    #[test]
    fn knn_count_example() {
        let s = ConnectionStrategy::new(ConnectionMode::Knn, 1.001, 2, 1.0).unwrap();
        assert_eq!(s.connection_param(100), ConnectionParam::K(19));
        let mut last = 0;
        for q in 2..5000 {
            let ConnectionParam::K(k) = s.connection_param(q) else { unreachable!() };
            assert!(k >= last);
            last = k;
        }
    }

    #[test]
    fn rdisc_radius_example() {
        let s = ConnectionStrategy::new(ConnectionMode::RDisc, 1.001, 2, 1.0).unwrap();
        let ConnectionParam::Radius(r) = s.connection_param(100) else { unreachable!() };
        // 1.001 * 2 * sqrt(1.5 / pi * ln(100) / 100), evaluated independently
        assert!((r - 0.296_864_050_301_706_7).abs() < 1e-12, "{r}");
    }

    fn line_rgg(k: usize) -> Rgg {
        // start at 0, goal at 0.3, sample at 0.1 (all on the x axis)
        let mut set = SampleSet::new(sv(&[0.0, 0.0]), sv(&[0.3, 0.0])).unwrap();
        set.push(sv(&[0.1, 0.0]), 1).unwrap();
        let strat = ConnectionStrategy::new(ConnectionMode::Knn, 1.0, 2, 1.0).unwrap();
        let mut rgg = Rgg::new(set, strat).unwrap();
        rgg.param = ConnectionParam::K(k);
        rgg
    }

    #[test]
    fn nearest_on_a_line() {
        let rgg = line_rgg(1);
        assert_eq!(rgg.neighbors(0), vec![2]);
        let mut rgg = rgg;
        rgg.param = ConnectionParam::Radius(0.15);
        assert_eq!(rgg.neighbors(0), vec![2]);
    }

    #[test]
    fn add_batch_contract() {
        let scene = Scene::empty(ProblemBounds::unit(2).unwrap());
        let mut set = SampleSet::new(sv(&[0.2, 0.5]), sv(&[0.8, 0.5])).unwrap();
        let mut rng = RngStream::new(1);
        let ids = set.add_batch(100, f64::INFINITY, &scene, 1, &mut rng).unwrap();
        assert_eq!(ids.len(), 100);
        assert_eq!(set.alive_count(), 102);
        for id in ids {
            assert!(scene.bounds().contains(set.coords(id)));
        }
        // degenerate informed set
        let ids = set.add_batch(1, 0.6, &scene, 2, &mut rng).unwrap();
        assert!((set.coords(ids[0])[1] - 0.5).abs() < 1e-9);
        assert!(set.add_batch(0, f64::INFINITY, &scene, 3, &mut rng).is_err());
    }

    #[test]
    fn add_batch_respects_obstacles() {
        let wall = Aabb::extruded((0.4, 0.6), (0.0, 1.0), 2, 0.0, 1.0).unwrap();
        let scene = Scene::new(ProblemBounds::unit(2).unwrap(), Obstacles::Boxes(vec![wall])).unwrap();
        let mut set = SampleSet::new(sv(&[0.2, 0.5]), sv(&[0.8, 0.5])).unwrap();
        let mut rng = RngStream::new(2);
        for id in set.add_batch(300, f64::INFINITY, &scene, 1, &mut rng).unwrap() {
            assert!(scene.is_free(set.coords(id)));
        }
    }

    #[test]
    fn add_batch_gives_up_when_nothing_is_free() {
        let wall = Aabb::extruded((0.0, 1.0), (0.0, 1.0), 2, 0.0, 1.0).unwrap();
        let scene = Scene::new(ProblemBounds::unit(2).unwrap(), Obstacles::Boxes(vec![wall])).unwrap();
        let mut set = SampleSet::new(sv(&[0.2, 0.5]), sv(&[0.8, 0.5])).unwrap();
        let mut rng = RngStream::new(2);
        assert!(matches!(
            set.add_batch(1, f64::INFINITY, &scene, 1, &mut rng),
            Err(Error::InfeasibleSampling { .. })
        ));
    }

    #[test]
    fn prune_examples() {
        let scene = Scene::empty(ProblemBounds::unit(2).unwrap());
        let mut set = SampleSet::new(sv(&[0.2, 0.5]), sv(&[0.8, 0.5])).unwrap();
        let mut rng = RngStream::new(3);
        set.add_batch(200, f64::INFINITY, &scene, 1, &mut rng).unwrap();
        assert_eq!(set.prune(f64::INFINITY), 0);

        let expected: Vec<usize> = (2..set.len()).filter(|&i| set.focal_sum(i) > 0.8).collect();
        let mut pruned = set.clone();
        assert_eq!(pruned.prune(0.8), expected.len());
        for id in 0..set.len() {
            assert_eq!(pruned.is_alive(id), !expected.contains(&id));
        }

        let mut all = set.clone();
        all.prune(0.6);
        assert_eq!(all.alive_count(), 2);
        assert!(all.is_alive(START_ID) && all.is_alive(GOAL_ID));
    }

    #[test]
    fn rdisc_adjacency_is_symmetric_and_knn_closure_contains_raw() {
        let bounds = ProblemBounds::unit(3).unwrap();
        let mut rng = RngStream::new(4);
        let mut set = SampleSet::new(sample_uniform(&bounds, &mut rng), sample_uniform(&bounds, &mut rng)).unwrap();
        for _ in 0..80 {
            set.push(sample_uniform(&bounds, &mut rng), 1).unwrap();
        }
        for mode in [ConnectionMode::Knn, ConnectionMode::RDisc] {
            let rgg = Rgg::new(set.clone(), ConnectionStrategy::new(mode, 1.001, 3, 1.0).unwrap()).unwrap();
            for id in set.alive_ids() {
                let adj: Vec<usize> = rgg.adjacent(id).iter().map(|e| e.to).collect();
                for n in rgg.neighbors(id) {
                    assert!(adj.contains(&n));
                    if mode == ConnectionMode::RDisc {
                        assert!(rgg.neighbors(n).contains(&id));
                    }
                }
                for e in rgg.adjacent(id) {
                    assert!(rgg.adjacent(e.to).iter().any(|b| b.to == id && b.cost == e.cost));
                }
            }
        }
    }
}
