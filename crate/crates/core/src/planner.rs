//! Types shared by every anytime planner in the crate.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scene::Scene;
use crate::space::StateVec;

/// A start/goal query over a scene.
#[derive(Clone, Debug)]
pub struct Problem {
    pub scene: Scene,
    pub start: StateVec,
    pub goal: StateVec,
}

impl Problem {
    pub fn new(scene: Scene, start: StateVec, goal: StateVec) -> Result<Self> {
        check_dim(scene.dim(), start.dim())?;
        check_dim(scene.dim(), goal.dim())?;
        if !scene.state_valid(&start)? {
            return Err(Error::InvalidArgument(format!("start {start:?} is not a valid state")));
        }
        if !scene.state_valid(&goal)? {
            return Err(Error::InvalidArgument(format!("goal {goal:?} is not a valid state")));
        }
        Ok(Self { scene, start, goal })
    }
}

/// Which clause of the bidirectional stop rule ended a search epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopClause {
    /// Incumbent no larger than the smaller queue minimum.
    Min,
    /// Incumbent no larger than the mean of both queue minima.
    Mean,
    /// Both clauses held.
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    FirstSolution,
    ImprovedSolution,
    BatchAdded,
    Pruned,
    SearchStopped(StopClause),
}

impl EventKind {
    pub fn is_solution(self) -> bool {
        matches!(self, EventKind::FirstSolution | EventKind::ImprovedSolution)
    }
}

/// Timestamped entry in a planner's log. For non-solution events `cost` is
/// the incumbent at that moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerEvent {
    pub wall_time_s: f64,
    pub kind: EventKind,
    pub cost: f64,
}

/// Run limits. The batch cap makes runs reproducible independent of speed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    pub time: Duration,
    pub max_batches: Option<usize>,
}

impl Budget {
    pub fn seconds(s: f64) -> Self {
        Self {
            time: Duration::from_secs_f64(s.max(0.0)),
            max_batches: None,
        }
    }

    pub fn batches(max_batches: usize) -> Self {
        Self {
            time: Duration::from_secs(3600 * 24),
            max_batches: Some(max_batches),
        }
    }

    pub fn with_max_batches(mut self, max_batches: usize) -> Self {
        self.max_batches = Some(max_batches);
        self
    }
}

/// Outcome of one planner iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    /// Work was done; call again.
    Progress,
    /// The batch limit was reached and the last batch is exhausted.
    Finished,
}

/// Anytime planner driven one iteration at a time.
pub trait AnytimePlanner {
    fn name(&self) -> &'static str;

    fn step(&mut self) -> Result<Step>;

    /// Cost of the incumbent, infinite when none.
    fn best_cost(&self) -> f64;

    fn best_path(&self) -> Result<Option<Vec<StateVec>>>;

    fn events(&self) -> &[PlannerEvent];

    /// Number of sampled batches so far.
    fn batches(&self) -> usize;

    fn set_batch_limit(&mut self, limit: Option<usize>);
}

/// Final result of a planning run.
#[derive(Clone, Debug)]
pub struct PlanResult {
    pub planner: &'static str,
    pub cost: f64,
    pub path: Option<Vec<StateVec>>,
    pub events: Vec<PlannerEvent>,
    pub batches: usize,
}

impl PlanResult {
    pub fn solved(&self) -> bool {
        self.cost.is_finite()
    }

    pub fn first_solution_time(&self) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.kind.is_solution())
            .map(|e| e.wall_time_s)
    }
}

/// Runs `planner` until the budget is spent or it reports completion.
pub fn drive<P: AnytimePlanner + ?Sized>(planner: &mut P, budget: Budget, started: Instant) -> Result<PlanResult> {
    planner.set_batch_limit(budget.max_batches);
    while started.elapsed() < budget.time {
        if planner.step()? == Step::Finished {
            break;
        }
    }
    Ok(PlanResult {
        planner: planner.name(),
        cost: planner.best_cost(),
        path: planner.best_path()?,
        events: planner.events().to_vec(),
        batches: planner.batches(),
    })
}

/// Sum of Euclidean segment lengths.
pub fn path_cost(path: &[StateVec]) -> f64 {
    path.windows(2)
        .map(|w| crate::space::dist(w[0].as_slice(), w[1].as_slice()))
        .sum()
}

/// Event log with a shared clock.
#[derive(Clone, Debug)]
pub(crate) struct EventLog {
    clock: Instant,
    events: Vec<PlannerEvent>,
}

impl EventLog {
    pub fn new() -> Self {
        Self {
            clock: Instant::now(),
            events: Vec::new(),
        }
    }

    pub fn push(&mut self, kind: EventKind, cost: f64) {
        self.events.push(PlannerEvent {
            wall_time_s: self.clock.elapsed().as_secs_f64(),
            kind,
            cost,
        });
    }

    pub fn solution(&mut self, cost: f64) {
        let first = !self.events.iter().any(|e| e.kind.is_solution());
        self.push(
            if first {
                EventKind::FirstSolution
            } else {
                EventKind::ImprovedSolution
            },
            cost,
        );
    }

    pub fn events(&self) -> &[PlannerEvent] {
        &self.events
    }
}
