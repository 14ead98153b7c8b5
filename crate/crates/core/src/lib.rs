//! Sampling-based anytime motion planning: BIGIT*, a BIT* baseline, exact
//! graph oracles and a benchmark harness.

pub mod baseline;
pub mod bench;
pub mod bigit;
pub mod error;
pub mod planner;
pub mod rgg;
pub mod scene;
pub mod search;
pub mod space;

pub use error::{Error, Result};
pub use planner::{drive, path_cost, AnytimePlanner, Budget, EventKind, PlanResult, PlannerEvent, Problem, Step, StopClause};
pub use rgg::{ConnectionMode, ConnectionParam, ConnectionStrategy, Rgg, SampleSet, GOAL_ID, START_ID};
pub use scene::{load_raster_map, Aabb, Obstacles, RasterMap, Scene, SparseCheckLedger};
pub use space::{distance, interpolate, sample_informed, sample_uniform, InformedSampler, ProblemBounds, RngStream, StateVec};
