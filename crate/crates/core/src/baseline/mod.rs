//! BIT* reference planner and exact oracles.

mod oracle;

pub use oracle::{dijkstra_rgg_oracle, grid_dijkstra_oracle, ExplicitGraph, GridWorld};

use std::collections::HashSet;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::planner::{drive, AnytimePlanner, Budget, EventKind, EventLog, PlanResult, PlannerEvent, Problem, Step};
use crate::rgg::{ConnectionMode, ConnectionStrategy, Rgg, SampleSet, GOAL_ID, START_ID};
use crate::search::{DirectionalSearch, EdgeOutcome, Gate, INF};
use crate::space::{InformedSampler, RngStream, StateVec};

#[derive(Clone, Debug, PartialEq)]
pub struct BitStarConfig {
    pub batch_size: usize,
    pub eta: f64,
    pub connection: ConnectionMode,
}

impl Default for BitStarConfig {
    fn default() -> Self {
        Self {
            batch_size: 100,
            eta: 1.001,
            connection: ConnectionMode::Knn,
        }
    }
}

/// Forward-only batch informed tree search.
pub struct BitStarPlanner {
    problem: Problem,
    config: BitStarConfig,
    rng: RngStream,
    rgg: Rgg,
    search: DirectionalSearch,
    invalid: HashSet<(usize, usize)>,
    u_e: f64,
    started: bool,
    done: bool,
    batches: usize,
    batch_limit: Option<usize>,
    frozen: Option<Vec<StateVec>>,
    log: EventLog,
}

impl BitStarPlanner {
    pub fn new(problem: Problem, config: BitStarConfig, rng: RngStream) -> Result<Self> {
        if config.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        let dim = problem.scene.dim();
        let strategy = ConnectionStrategy::new(config.connection, config.eta, dim, problem.scene.bounds().measure())?;
        let rgg = Rgg::new(SampleSet::new(problem.start.clone(), problem.goal.clone())?, strategy)?;
        let search = DirectionalSearch::new(START_ID, GOAL_ID, rgg.samples().len(), Gate::Strict);
        Ok(Self {
            problem,
            config,
            rng,
            rgg,
            search,
            invalid: HashSet::new(),
            u_e: INF,
            started: false,
            done: false,
            batches: 0,
            batch_limit: None,
            frozen: None,
            log: EventLog::new(),
        })
    }

    /// A planner whose only batch is the given states.
    pub fn with_states(problem: Problem, config: BitStarConfig, states: Vec<StateVec>) -> Result<Self> {
        let mut p = Self::new(problem, config, RngStream::new(0))?;
        p.frozen = Some(states);
        p.batch_limit = Some(1);
        Ok(p)
    }

    pub fn rgg(&self) -> &Rgg {
        &self.rgg
    }

    pub fn tree_g(&self, id: usize) -> f64 {
        self.search.tree.g(id)
    }

    pub fn tree_g_hat(&self, id: usize) -> f64 {
        self.search.tree.g_hat(id)
    }

    fn new_batch(&mut self) -> Result<()> {
        self.batches += 1;
        let batch = self.batches;
        if let Some(states) = self.frozen.take() {
            self.rgg.add_states(states, batch)?;
        } else {
            if self.u_e.is_finite() {
                let c_min = self.rgg.cost(START_ID, GOAL_ID);
                let sampler = InformedSampler::new(&self.problem.start, &self.problem.goal, self.u_e.max(c_min))?;
                self.rgg
                    .set_measure(self.problem.scene.bounds().measure().min(sampler.measure()));
            }
            let u_e = self.u_e;
            self.rgg
                .add_batch(self.config.batch_size, u_e, &self.problem.scene, batch, &mut self.rng)?;
        }
        self.search.resize(self.rgg.samples().len());
        self.log.push(EventKind::BatchAdded, self.u_e);
        self.invalid.clear();
        self.search.restart(&self.rgg, &self.invalid, self.u_e);
        Ok(())
    }

    fn end_batch(&mut self) -> Result<()> {
        if self.batch_limit.is_some_and(|l| self.batches >= l) {
            self.done = true;
            return Ok(());
        }
        if self.u_e.is_finite() {
            let keep: HashSet<usize> = self.search.tree.branch(GOAL_ID)?.into_iter().collect();
            let removed = self
                .rgg
                .samples_mut()
                .prune_protected(self.u_e, |id| keep.contains(&id));
            let samples = self.rgg.samples();
            self.search.tree.remove_dead(|id| samples.is_alive(id));
            if removed > 0 {
                self.log.push(EventKind::Pruned, self.u_e);
            }
        }
        self.new_batch()
    }
}

impl AnytimePlanner for BitStarPlanner {
    fn name(&self) -> &'static str {
        "bitstar"
    }

    fn step(&mut self) -> Result<Step> {
        if self.done {
            return Ok(Step::Finished);
        }
        if !self.started {
            self.started = true;
            if self.problem.start == self.problem.goal {
                self.u_e = 0.0;
                self.log.solution(0.0);
                self.done = true;
                return Ok(Step::Finished);
            }
            self.new_batch()?;
            return Ok(Step::Progress);
        }
        if self.u_e <= self.search.queue.min_key() {
            self.end_batch()?;
        } else if let Some(edge) = self.search.queue.pop() {
            let out = self
                .search
                .process(&self.rgg, &self.problem.scene, &mut self.invalid, edge, self.u_e);
            if let EdgeOutcome::Improved(_) = out {
                let c = self.search.tree.g(GOAL_ID);
                if c < self.u_e {
                    self.u_e = c;
                    self.log.solution(c);
                }
            }
        }
        Ok(if self.done { Step::Finished } else { Step::Progress })
    }

    fn best_cost(&self) -> f64 {
        self.u_e
    }

    fn best_path(&self) -> Result<Option<Vec<StateVec>>> {
        if !self.u_e.is_finite() {
            return Ok(None);
        }
        if self.problem.start == self.problem.goal {
            return Ok(Some(vec![self.problem.start.clone()]));
        }
        let s = self.rgg.samples();
        Ok(Some(
            self.search
                .tree
                .branch(GOAL_ID)?
                .into_iter()
                .map(|i| s.state(i).clone())
                .collect(),
        ))
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

/// Runs BIT* on `problem` within `budget`.
pub fn bit_star_plan(problem: Problem, config: BitStarConfig, budget: Budget, seed: u64) -> Result<PlanResult> {
    let started = Instant::now();
    let mut planner = BitStarPlanner::new(problem, config, RngStream::new(seed))?;
    drive(&mut planner, budget, started)
}
