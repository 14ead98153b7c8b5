//! Argument parsing and dispatch for the `bigit` benchmark runner.

use std::path::PathBuf;

use bigit_core::bench::{self, BenchmarkConfig, BenchmarkOutput, Domain, PlannerKind, PlannerSettings};
use bigit_core::bigit::LazyRefresh;
use bigit_core::{load_raster_map, ConnectionMode, Error, Result};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Wallgap,
    Enclosure,
    Map,
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlannerArg {
    Bigit,
    Bitstar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConnectionArg {
    Knn,
    Rdisc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RefreshArg {
    First,
    Every,
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected X,Y but got {s:?}"));
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok([x, y])
}

/// Benchmark BIGIT* and BIT* on the built-in domains or a PGM map.
#[derive(Clone, Debug, Parser)]
#[command(name = "bigit", version, arg_required_else_help = true)]
pub struct Cli {
    #[arg(long, value_enum)]
    pub domain: DomainArg,

    /// Occupancy map (PGM), required for `--domain map`.
    #[arg(long, required_if_eq("domain", "map"))]
    pub map_file: Option<PathBuf>,

    #[arg(long, default_value_t = 1.0)]
    pub meters_per_pixel: f64,

    /// Pixels darker than this are obstacles.
    #[arg(long, default_value_t = 128)]
    pub occupied_below: u16,

    /// Robot radius in map units; the map is dilated by it.
    #[arg(long, default_value_t = 0.25)]
    pub footprint_radius: f64,

    /// Map start, in map units.
    #[arg(long, value_parser = parse_point, required_if_eq("domain", "map"))]
    pub start: Option<[f64; 2]>,

    /// Map goal, in map units.
    #[arg(long, value_parser = parse_point, required_if_eq("domain", "map"))]
    pub goal: Option<[f64; 2]>,

    #[arg(long, default_value_t = 2)]
    pub dim: usize,

    /// Planner to run; repeat for several.
    #[arg(long = "planner", value_enum, default_values_t = [PlannerArg::Bigit])]
    pub planners: Vec<PlannerArg>,

    /// States per batch [default: 100, 6000 for map]
    #[arg(long)]
    pub batch_size: Option<usize>,

    #[arg(long, default_value_t = 1.001)]
    pub eta: f64,

    /// [default: knn, rdisc for map]
    #[arg(long, value_enum)]
    pub connection: Option<ConnectionArg>,

    /// Collision-check segments per edge.
    #[arg(long, default_value_t = 200)]
    pub segments: usize,

    #[arg(long, default_value_t = 100)]
    pub trials: usize,

    /// Seconds per trial [default: 5 in R^2, 100 above, 2 for map]
    #[arg(long)]
    pub budget: Option<f64>,

    /// Stop each trial after this many batches.
    #[arg(long)]
    pub max_batches: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,

    /// Worker threads [default: available cores]
    #[arg(long)]
    pub jobs: Option<usize>,

    #[arg(long, default_value = "results")]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = Switch::Off)]
    pub normalize_keys: Switch,

    #[arg(long, value_enum, default_value_t = RefreshArg::First)]
    pub lazy_refresh: RefreshArg,
}

/// Parses `argv` (program name first).
pub fn parse_cli<I, T>(argv: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

impl Cli {
    pub fn build_domain(&self) -> Result<Domain> {
        let domain = match self.domain {
            DomainArg::Wallgap => bench::wall_gap(self.dim)?,
            DomainArg::Enclosure => bench::enclosure(self.dim)?,
            DomainArg::Empty => bench::empty(self.dim)?,
            DomainArg::Map => {
                if self.dim != 2 {
                    return Err(Error::InvalidArgument("the map domain is planar; use --dim 2".into()));
                }
                let path = self
                    .map_file
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("--map-file is required".into()))?;
                let bytes = std::fs::read(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                let raster = load_raster_map(&bytes, self.meters_per_pixel, self.occupied_below)?;
                let start = self.start.ok_or_else(|| Error::InvalidArgument("--start is required".into()))?;
                let goal = self.goal.ok_or_else(|| Error::InvalidArgument("--goal is required".into()))?;
                bench::map(raster, self.footprint_radius, start, goal)?
            }
        };
        let mut domain = domain;
        let scene = domain.problem.scene.clone().with_collision_segments(self.segments)?;
        domain.problem.scene = scene;
        Ok(domain)
    }

    pub fn benchmark_config(&self) -> Result<BenchmarkConfig> {
        let mut planners: Vec<PlannerKind> = self
            .planners
            .iter()
            .map(|p| match p {
                PlannerArg::Bigit => PlannerKind::Bigit,
                PlannerArg::Bitstar => PlannerKind::Bitstar,
            })
            .collect();
        planners.dedup();
        let jobs = self
            .jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        Ok(BenchmarkConfig {
            domains: vec![self.build_domain()?],
            planners,
            settings: PlannerSettings {
                batch_size: self.batch_size,
                eta: self.eta,
                connection: self.connection.map(|c| match c {
                    ConnectionArg::Knn => ConnectionMode::Knn,
                    ConnectionArg::Rdisc => ConnectionMode::RDisc,
                }),
                normalize_keys: self.normalize_keys == Switch::On,
                lazy_refresh: match self.lazy_refresh {
                    RefreshArg::First => LazyRefresh::First,
                    RefreshArg::Every => LazyRefresh::Every,
                },
                max_batches: self.max_batches,
            },
            trials: self.trials,
            seed_base: self.seed_base,
            budget_s: self.budget,
            jobs,
        })
    }
}

/// Runs the benchmark and writes its outputs.
pub fn run(cli: &Cli) -> Result<BenchmarkOutput> {
    let config = cli.benchmark_config()?;
    let output = bench::run_benchmark(&config)?;
    bench::emit_outputs(&output, &cli.out)?;
    Ok(output)
}
