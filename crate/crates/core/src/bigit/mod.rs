//! Bidirectional guidance informed trees.

mod lazy;

pub use lazy::{LazyOutcome, LazySearch};

use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{drive, AnytimePlanner, Budget, EventKind, EventLog, PlanResult, PlannerEvent, Problem, Step, StopClause};
use crate::rgg::{ConnectionMode, ConnectionStrategy, Rgg, SampleSet, GOAL_ID, START_ID};
use crate::scene::SparseCheckLedger;
use crate::search::{Direction, DirectionalSearch, EdgeOutcome, Gate, INF};
use crate::space::{dist, InformedSampler, RngStream, StateVec};

/// `max(g + h, 2g)`.
pub fn mm_priority(g_hat: f64, h_lower: f64) -> f64 {
    (g_hat + h_lower).max(2.0 * g_hat)
}

/// True once the incumbent is no larger than the smaller queue minimum or
/// the mean of both.
pub fn stop_condition(u_e: f64, prmin_f: f64, prmin_b: f64) -> bool {
    u_e <= prmin_f.min(prmin_b) || u_e <= (prmin_f + prmin_b) / 2.0
}

fn stop_clause(u_e: f64, prmin_f: f64, prmin_b: f64) -> Option<StopClause> {
    match (u_e <= prmin_f.min(prmin_b), u_e <= (prmin_f + prmin_b) / 2.0) {
        (true, true) => Some(StopClause::Both),
        (true, false) => Some(StopClause::Min),
        (false, true) => Some(StopClause::Mean),
        (false, false) => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LazyRefresh {
    /// Lazy search and guidance only until the first guided batch.
    First,
    /// Recomputed at the start of every batch.
    Every,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BigitConfig {
    pub batch_size: usize,
    pub eta: f64,
    pub connection: ConnectionMode,
    pub normalize_keys: bool,
    pub lazy_refresh: LazyRefresh,
    /// Dyadic level for the sparse check of meeting edges.
    pub sparse_check_level: u32,
    /// Seed the guidance search from every meeting state rather than only
    /// the best one.
    pub seed_all_meeting: bool,
}

impl Default for BigitConfig {
    fn default() -> Self {
        Self {
            batch_size: 100,
            eta: 1.001,
            connection: ConnectionMode::Knn,
            normalize_keys: false,
            lazy_refresh: LazyRefresh::First,
            sparse_check_level: 3,
            seed_all_meeting: true,
        }
    }
}

/// Per-direction view of one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionalRecord {
    pub g: f64,
    /// Best cost offered by a queued edge; never above `g`.
    pub g_hat: f64,
    /// Cost-to-come found by the lazy search.
    pub g_lazy: f64,
    pub parent: Option<usize>,
    pub in_tree: bool,
    pub h_guid: Option<f64>,
    pub expanded_lazy: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Init,
    Lazy,
    Guided,
    Done,
}

pub struct BigitPlanner {
    problem: Problem,
    config: BigitConfig,
    rng: RngStream,
    rgg: Rgg,
    dirs: [DirectionalSearch; 2],
    lazy: Option<LazySearch>,
    ledger: SparseCheckLedger,
    invalid: HashSet<(usize, usize)>,
    u_e: f64,
    meet: Option<usize>,
    phase: Phase,
    batches: usize,
    batch_limit: Option<usize>,
    frozen: Option<Vec<StateVec>>,
    guidance_live: bool,
    log: EventLog,
}

impl BigitPlanner {
    pub fn new(problem: Problem, config: BigitConfig, rng: RngStream) -> Result<Self> {
        if config.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        let dim = problem.scene.dim();
        let measure = problem.scene.bounds().measure();
        let strategy = ConnectionStrategy::new(config.connection, config.eta, dim, measure)?;
        let samples = SampleSet::new(problem.start.clone(), problem.goal.clone())?;
        let rgg = Rgg::new(samples, strategy)?;
        let n = rgg.samples().len();
        let mut dirs = [
            DirectionalSearch::new(START_ID, GOAL_ID, n, Gate::Bidirectional),
            DirectionalSearch::new(GOAL_ID, START_ID, n, Gate::Bidirectional),
        ];
        if config.normalize_keys {
            for d in &mut dirs {
                d.normalize = Some((INF, rgg.cost(START_ID, GOAL_ID)));
            }
        }
        Ok(Self {
            problem,
            config,
            rng,
            rgg,
            dirs,
            lazy: None,
            ledger: SparseCheckLedger::new(),
            invalid: HashSet::new(),
            u_e: INF,
            meet: None,
            phase: Phase::Init,
            batches: 0,
            batch_limit: None,
            frozen: None,
            guidance_live: false,
            log: EventLog::new(),
        })
    }

    /// A planner whose only batch is the given states, used for exact
    /// comparisons on a fixed graph.
    pub fn with_states(problem: Problem, config: BigitConfig, states: Vec<StateVec>) -> Result<Self> {
        let mut p = Self::new(problem, config, RngStream::new(0))?;
        p.frozen = Some(states);
        p.batch_limit = Some(1);
        Ok(p)
    }

    pub fn rgg(&self) -> &Rgg {
        &self.rgg
    }

    pub fn incumbent(&self) -> f64 {
        self.u_e
    }

    pub fn meet(&self) -> Option<usize> {
        self.meet
    }

    pub fn lazy(&self) -> Option<&LazySearch> {
        self.lazy.as_ref()
    }

    pub fn tree_g(&self, d: Direction, id: usize) -> f64 {
        self.dirs[d.index()].tree.g(id)
    }

    pub fn record(&self, id: usize, d: Direction) -> DirectionalRecord {
        let s = &self.dirs[d.index()];
        let h = s.h_guid.get(id).copied().unwrap_or(INF);
        DirectionalRecord {
            g: s.tree.g(id),
            g_hat: s.tree.g_hat(id),
            g_lazy: self.lazy.as_ref().map_or(INF, |l| l.g(d, id)),
            parent: s.tree.parent(id),
            in_tree: s.tree.contains(id),
            h_guid: h.is_finite().then_some(h),
            expanded_lazy: self.lazy.as_ref().is_some_and(|l| l.expanded(d, id)),
        }
    }

    /// Minimum queue key per direction.
    pub fn queue_minima(&self) -> (f64, f64) {
        (self.dirs[0].queue.min_key(), self.dirs[1].queue.min_key())
    }

    fn c_min(&self) -> f64 {
        self.rgg.cost(START_ID, GOAL_ID)
    }

    fn sample_batch(&mut self) -> Result<()> {
        self.batches += 1;
        let batch = self.batches;
        if let Some(states) = self.frozen.take() {
            self.rgg.add_states(states, batch)?;
        } else {
            if self.u_e.is_finite() {
                let sampler = InformedSampler::new(&self.problem.start, &self.problem.goal, self.u_e.max(self.c_min()))?;
                let measure = self.problem.scene.bounds().measure().min(sampler.measure());
                self.rgg.set_measure(measure);
            }
            let u_e = self.u_e;
            self.rgg
                .add_batch(self.config.batch_size, u_e, &self.problem.scene, batch, &mut self.rng)?;
        }
        let n = self.rgg.samples().len();
        for d in &mut self.dirs {
            d.resize(n);
        }
        self.log.push(EventKind::BatchAdded, self.u_e);
        Ok(())
    }

    fn begin_guided(&mut self) {
        self.invalid.clear();
        for d in &mut self.dirs {
            d.restart(&self.rgg, &self.invalid, self.u_e);
        }
        self.phase = Phase::Guided;
    }

    fn run_lazy(&mut self) -> Result<()> {
        let mut lazy = LazySearch::new(&self.rgg);
        let outcome = lazy.run(
            &self.rgg,
            &self.problem.scene,
            &mut self.ledger,
            self.config.sparse_check_level,
        );
        match outcome {
            LazyOutcome::Found { meet, cost } => {
                for d in Direction::BOTH {
                    let vals = lazy.guidance(&self.rgg, d, meet, self.config.seed_all_meeting);
                    let s = &mut self.dirs[d.index()];
                    s.h_guid.iter_mut().for_each(|h| *h = INF);
                    for (id, v) in vals {
                        s.h_guid[id] = s.h_guid[id].min(v);
                    }
                    if let Some((_, c_min)) = s.normalize {
                        s.normalize = Some((cost, c_min));
                    }
                }
                self.guidance_live = true;
                self.lazy = Some(lazy);
                self.begin_guided();
            }
            LazyOutcome::NoPath => {
                self.lazy = Some(lazy);
                if self.at_batch_limit() {
                    self.phase = Phase::Done;
                } else {
                    self.sample_batch()?;
                }
            }
        }
        Ok(())
    }

    fn at_batch_limit(&self) -> bool {
        self.batch_limit.is_some_and(|l| self.batches >= l)
    }

    fn clear_guidance(&mut self) {
        for d in &mut self.dirs {
            d.h_guid.iter_mut().for_each(|h| *h = INF);
        }
        self.guidance_live = false;
    }

    fn end_batch(&mut self) -> Result<()> {
        if self.at_batch_limit() {
            self.phase = Phase::Done;
            return Ok(());
        }
        if self.guidance_live && self.config.lazy_refresh == LazyRefresh::First {
            self.clear_guidance();
        }
        if self.u_e.is_finite() {
            let keep: HashSet<usize> = match self.meet {
                Some(m) => self.path_ids(m)?.into_iter().collect(),
                None => HashSet::new(),
            };
            let removed = self.rgg.samples_mut().prune_protected(self.u_e, |id| keep.contains(&id));
            let samples = self.rgg.samples();
            for d in &mut self.dirs {
                d.tree.remove_dead(|id| samples.is_alive(id));
            }
            if removed > 0 {
                self.log.push(EventKind::Pruned, self.u_e);
            }
        }
        self.sample_batch()?;
        let need_lazy = self.config.lazy_refresh == LazyRefresh::Every || self.lazy.is_none();
        if need_lazy {
            self.phase = Phase::Lazy;
        } else {
            self.begin_guided();
        }
        Ok(())
    }

    fn guided_step(&mut self) -> Result<()> {
        let pf = self.dirs[0].queue.min_key();
        let pb = self.dirs[1].queue.min_key();
        if stop_condition(self.u_e, pf, pb) {
            if self.u_e.is_finite() {
                if let Some(clause) = stop_clause(self.u_e, pf, pb) {
                    self.log.push(EventKind::SearchStopped(clause), self.u_e);
                }
            }
            return self.end_batch();
        }
        let d = if pf <= pb {
            Direction::Forward
        } else {
            Direction::Backward
        };
        let (this, other) = match d {
            Direction::Forward => {
                let (a, b) = self.dirs.split_at_mut(1);
                (&mut a[0], &b[0])
            }
            Direction::Backward => {
                let (a, b) = self.dirs.split_at_mut(1);
                (&mut b[0], &a[0])
            }
        };
        let Some(edge) = this.queue.pop() else {
            return Ok(());
        };
        let outcome = this.process(&self.rgg, &self.problem.scene, &mut self.invalid, edge, self.u_e);
        if let EdgeOutcome::Improved(changed) = outcome {
            let mut best = None;
            for v in changed {
                let c = this.tree.g(v) + other.tree.g(v);
                if c < self.u_e && best.is_none_or(|(bc, _)| c < bc) {
                    best = Some((c, v));
                }
            }
            if let Some((c, v)) = best {
                self.u_e = c;
                self.meet = Some(v);
                self.log.solution(c);
            }
        }
        Ok(())
    }

    fn path_ids(&self, meet: usize) -> Result<Vec<usize>> {
        let mut ids = self.dirs[0].tree.branch(meet)?;
        let mut back = self.dirs[1].tree.branch(meet)?;
        back.pop();
        back.reverse();
        ids.extend(back);
        Ok(ids)
    }

    /// States of the path through `meet`, start first.
    pub fn extract_path(&self, meet: usize) -> Result<Vec<StateVec>> {
        let ids = self.path_ids(meet)?;
        let s = self.rgg.samples();
        let path: Vec<StateVec> = ids.iter().map(|&i| s.state(i).clone()).collect();
        let total: f64 = ids.windows(2).map(|w| dist(s.coords(w[0]), s.coords(w[1]))).sum();
        let want = self.dirs[0].tree.g(meet) + self.dirs[1].tree.g(meet);
        if (total - want).abs() > 1e-9 * want.max(1.0) {
            return Err(Error::Internal(format!("path length {total} differs from tree cost {want}")));
        }
        Ok(path)
    }

    /// Runs until the current batch (or the lazy phase) is finished.
    pub fn run_batch(&mut self) -> Result<Step> {
        let start = self.batches;
        loop {
            if self.step()? == Step::Finished {
                return Ok(Step::Finished);
            }
            if self.batches > start && self.phase == Phase::Guided {
                return Ok(Step::Progress);
            }
        }
    }
}

impl AnytimePlanner for BigitPlanner {
    fn name(&self) -> &'static str {
        "bigit"
    }

    fn step(&mut self) -> Result<Step> {
        match self.phase {
            Phase::Init => {
                if self.problem.start == self.problem.goal {
                    self.u_e = 0.0;
                    self.meet = Some(START_ID);
                    self.log.solution(0.0);
                    self.phase = Phase::Done;
                    return Ok(Step::Finished);
                }
                self.sample_batch()?;
                self.phase = Phase::Lazy;
            }
            Phase::Lazy => self.run_lazy()?,
            Phase::Guided => self.guided_step()?,
            Phase::Done => return Ok(Step::Finished),
        }
        Ok(if self.phase == Phase::Done {
            Step::Finished
        } else {
            Step::Progress
        })
    }

    fn best_cost(&self) -> f64 {
        self.u_e
    }

    fn best_path(&self) -> Result<Option<Vec<StateVec>>> {
        if self.problem.start == self.problem.goal && self.u_e == 0.0 {
            return Ok(Some(vec![self.problem.start.clone()]));
        }
        self.meet.map(|m| self.extract_path(m)).transpose()
    }

    fn events(&self) -> &[PlannerEvent] {
        self.log.events()
    }

    fn batches(&self) -> usize {
        self.batches
    }

    fn set_batch_limit(&mut self, limit: Option<usize>) {
        if self.frozen.is_none() {
            self.batch_limit = limit;
        }
    }
}

/// Runs BIGIT* on `problem` within `budget`.
pub fn plan(problem: Problem, config: BigitConfig, budget: Budget, seed: u64) -> Result<PlanResult> {
    let started = Instant::now();
    let mut planner = BigitPlanner::new(problem, config, RngStream::new(seed))?;
    drive(&mut planner, budget, started)
}
