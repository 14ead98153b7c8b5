//! Benchmark domains, trial harness and report output.

mod domain;
mod report;

pub use domain::{empty, enclosure, map, wall_gap, Domain, WALL_GAP_OPTIMUM};
pub use report::{aggregate, emit_outputs, AggregateReport, CurvePoint, PlannerSummary};

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{BitStarConfig, BitStarPlanner};
use crate::bigit::{BigitConfig, BigitPlanner, LazyRefresh};
use crate::error::{Error, Result};
use crate::planner::{drive, Budget, PlanResult, PlannerEvent};
use crate::rgg::ConnectionMode;
use crate::space::{RngStream, StateVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Bigit,
    Bitstar,
}

impl PlannerKind {
    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Bigit => "bigit",
            PlannerKind::Bitstar => "bitstar",
        }
    }
}

/// Planner knobs shared by a benchmark run. `None` means the domain default.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannerSettings {
    pub batch_size: Option<usize>,
    pub eta: f64,
    pub connection: Option<ConnectionMode>,
    pub normalize_keys: bool,
    pub lazy_refresh: LazyRefresh,
    pub max_batches: Option<usize>,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        Self {
            batch_size: None,
            eta: 1.001,
            connection: None,
            normalize_keys: false,
            lazy_refresh: LazyRefresh::First,
            max_batches: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialResult {
    pub planner: PlannerKind,
    pub domain: String,
    pub dim: usize,
    pub seed: u64,
    pub success: bool,
    pub first_solution_time_s: Option<f64>,
    pub events: Vec<PlannerEvent>,
    pub final_cost: f64,
    #[serde(skip)]
    pub final_path: Option<Vec<StateVec>>,
    pub error: Option<String>,
}

impl TrialResult {
    /// Solution events only, in order.
    pub fn solution_events(&self) -> impl Iterator<Item = &PlannerEvent> {
        self.events.iter().filter(|e| e.kind.is_solution())
    }

    /// Incumbent cost at time `t`, infinite before the first solution.
    pub fn cost_at(&self, t: f64) -> f64 {
        self.solution_events()
            .take_while(|e| e.wall_time_s <= t)
            .last()
            .map_or(f64::INFINITY, |e| e.cost)
    }
}

fn run_planner(domain: &Domain, kind: PlannerKind, settings: &PlannerSettings, seed: u64, budget: Budget) -> Result<PlanResult> {
    let started = Instant::now();
    let batch_size = settings.batch_size.unwrap_or(domain.batch_size);
    let connection = settings.connection.unwrap_or(domain.connection);
    let rng = RngStream::new(seed);
    let problem = domain.problem.clone();
    match kind {
        PlannerKind::Bigit => {
            let config = BigitConfig {
                batch_size,
                eta: settings.eta,
                connection,
                normalize_keys: settings.normalize_keys,
                lazy_refresh: settings.lazy_refresh,
                ..BigitConfig::default()
            };
            drive(&mut BigitPlanner::new(problem, config, rng)?, budget, started)
        }
        PlannerKind::Bitstar => {
            let config = BitStarConfig {
                batch_size,
                eta: settings.eta,
                connection,
            };
            drive(&mut BitStarPlanner::new(problem, config, rng)?, budget, started)
        }
    }
}

/// One seeded run. Planner errors become a failed trial.
pub fn run_trial(domain: &Domain, kind: PlannerKind, settings: &PlannerSettings, seed: u64, budget: Budget) -> TrialResult {
    let mut trial = TrialResult {
        planner: kind,
        domain: domain.name.clone(),
        dim: domain.dim(),
        seed,
        success: false,
        first_solution_time_s: None,
        events: Vec::new(),
        final_cost: f64::INFINITY,
        final_path: None,
        error: None,
    };
    match run_planner(domain, kind, settings, seed, budget) {
        Ok(r) => {
            trial.success = r.solved();
            trial.first_solution_time_s = r.first_solution_time();
            trial.final_cost = r.cost;
            trial.final_path = r.path;
            trial.events = r.events;
        }
        Err(e) => trial.error = Some(e.to_string()),
    }
    trial
}

#[derive(Clone, Debug)]
pub struct BenchmarkConfig {
    pub domains: Vec<Domain>,
    pub planners: Vec<PlannerKind>,
    pub settings: PlannerSettings,
    pub trials: usize,
    pub seed_base: u64,
    /// Per-trial budget; `None` uses each domain's default.
    pub budget_s: Option<f64>,
    pub jobs: usize,
}

#[derive(Clone, Debug)]
pub struct BenchmarkOutput {
    pub trials: Vec<TrialResult>,
    pub report: AggregateReport,
}

/// Runs every (domain, planner, seed) combination on a pool of `jobs`
/// threads. Results come back in a fixed order.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkOutput> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let mut work = Vec::new();
    for (di, domain) in config.domains.iter().enumerate() {
        for &kind in &config.planners {
            for t in 0..config.trials as u64 {
                let budget = Budget {
                    time: Duration::from_secs_f64(config.budget_s.unwrap_or(domain.budget_s).max(0.0)),
                    max_batches: config.settings.max_batches,
                };
                work.push((di, kind, config.seed_base + t, budget));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let trials: Vec<TrialResult> = pool.install(|| {
        work.par_iter()
            .map(|&(di, kind, seed, budget)| run_trial(&config.domains[di], kind, &config.settings, seed, budget))
            .collect()
    });
    let budgets: Vec<(String, f64)> = config
        .domains
        .iter()
        .map(|d| (d.name.clone(), config.budget_s.unwrap_or(d.budget_s)))
        .collect();
    let report = aggregate(&trials, &budgets);
    Ok(BenchmarkOutput { trials, report })
}
