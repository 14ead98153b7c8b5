use crate::error::{Error, Result};
use crate::planner::Problem;
use crate::rgg::ConnectionMode;
use crate::scene::{Aabb, Obstacles, RasterMap, Scene};
use crate::space::{ProblemBounds, StateVec};

/// Optimal Wall Gap cost: around both corners of the gap.
pub const WALL_GAP_OPTIMUM: f64 = 0.630_813_184_570_760_4;

/// A benchmark scenario.
#[derive(Clone, Debug)]
pub struct Domain {
    pub name: String,
    pub problem: Problem,
    pub connection: ConnectionMode,
    pub batch_size: usize,
    /// Default per-trial budget in seconds.
    pub budget_s: f64,
}

impl Domain {
    pub fn dim(&self) -> usize {
        self.problem.scene.dim()
    }
}

/// Query point whose first two coordinates are given and the rest sit at the
/// middle of the unit range.
fn planar_point(x: f64, y: f64, dim: usize) -> Result<StateVec> {
    let mut v = vec![0.5; dim];
    v[0] = x;
    v[1] = y;
    StateVec::new(v)
}

fn boxes_domain(name: &str, dim: usize, boxes: &[((f64, f64), (f64, f64))], start: (f64, f64), goal: (f64, f64)) -> Result<Domain> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {dim}")));
    }
    let obstacles = boxes
        .iter()
        .map(|&(x, y)| Aabb::extruded(x, y, dim, 0.0, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let scene = Scene::new(ProblemBounds::unit(dim)?, Obstacles::Boxes(obstacles))?;
    let problem = Problem::new(scene, planar_point(start.0, start.1, dim)?, planar_point(goal.0, goal.1, dim)?)?;
    Ok(Domain {
        name: format!("{name}_r{dim}"),
        problem,
        connection: ConnectionMode::Knn,
        batch_size: 100,
        budget_s: if dim > 2 { 100.0 } else { 5.0 },
    })
}

/// A wall at x in [0.4, 0.6] with a 0.04 gap at y in [0.58, 0.62], open
/// above 0.8.
pub fn wall_gap(dim: usize) -> Result<Domain> {
    boxes_domain(
        "wallgap",
        dim,
        &[((0.4, 0.6), (0.0, 0.58)), ((0.4, 0.6), (0.62, 0.8))],
        (0.2, 0.5),
        (0.8, 0.5),
    )
}

/// The goal sits inside a three-sided box whose left wall has a 0.01 gap.
pub fn enclosure(dim: usize) -> Result<Domain> {
    boxes_domain(
        "enclosure",
        dim,
        &[
            ((0.30, 0.75), (0.20, 0.22)),
            ((0.30, 0.75), (0.78, 0.80)),
            ((0.30, 0.32), (0.20, 0.58)),
            ((0.30, 0.32), (0.59, 0.78)),
        ],
        (0.29, 0.5),
        (0.36, 0.5),
    )
}

pub fn empty(dim: usize) -> Result<Domain> {
    boxes_domain("empty", dim, &[], (0.2, 0.5), (0.8, 0.5))
}

/// Planar raster map domain. `footprint_radius` is in map units.
pub fn map(raster: RasterMap, footprint_radius: f64, start: [f64; 2], goal: [f64; 2]) -> Result<Domain> {
    let cells = (footprint_radius / raster.meters_per_pixel()).ceil().max(0.0) as usize;
    let raster = raster.dilated(cells);
    let scene = Scene::new(raster.bounds()?, Obstacles::Raster(raster))?;
    let problem = Problem::new(scene, StateVec::from_slice(&start)?, StateVec::from_slice(&goal)?)?;
    Ok(Domain {
        name: "map_r2".into(),
        problem,
        connection: ConnectionMode::RDisc,
        batch_size: 6000,
        budget_s: 2.0,
    })
}
