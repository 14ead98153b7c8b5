//! Obstacle models, state validity and edge collision checking.

use std::collections::HashMap;

use crate::error::{check_dim, Error, Result};
use crate::space::{dist, ProblemBounds, StateVec};

pub const DEFAULT_COLLISION_SEGMENTS: usize = 200;

/// Closed axis-aligned box obstacle.
#[derive(Clone, Debug, PartialEq)]
pub struct Aabb {
    min: StateVec,
    max: StateVec,
}

impl Aabb {
    pub fn new(min: StateVec, max: StateVec) -> Result<Self> {
        check_dim(min.dim(), max.dim())?;
        for i in 0..min.dim() {
            if min[i] > max[i] {
                return Err(Error::InvalidArgument(format!(
                    "box axis {i}: min {} exceeds max {}",
                    min[i], max[i]
                )));
            }
        }
        Ok(Self { min, max })
    }

    /// Box covering `[x0,x1] x [y0,y1]` in the first two axes and `[lo,hi]`
    /// on every remaining axis.
    pub fn extruded(x: (f64, f64), y: (f64, f64), dim: usize, lo: f64, hi: f64) -> Result<Self> {
        let mut min = vec![lo; dim];
        let mut max = vec![hi; dim];
        min[0] = x.0;
        max[0] = x.1;
        min[1] = y.0;
        max[1] = y.1;
        Self::new(StateVec::new(min)?, StateVec::new(max)?)
    }

    pub fn min(&self) -> &StateVec {
        &self.min
    }

    pub fn max(&self) -> &StateVec {
        &self.max
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.min.as_slice().iter().zip(self.max.as_slice()))
            .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }
}

/// Occupancy raster. Row 0 of `occupancy` is the top image row; world
/// `origin` sits at the bottom-left corner of the bottom-left pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterMap {
    width: usize,
    height: usize,
    occupancy: Vec<bool>,
    meters_per_pixel: f64,
    origin: [f64; 2],
}

impl RasterMap {
    pub fn new(width: usize, height: usize, occupancy: Vec<bool>, meters_per_pixel: f64) -> Result<Self> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(occupancy.len()) {
            return Err(Error::InvalidArgument(format!(
                "raster of {width}x{height} cannot hold {} cells",
                occupancy.len()
            )));
        }
        if !(meters_per_pixel > 0.0) || !meters_per_pixel.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "meters per pixel must be positive, got {meters_per_pixel}"
            )));
        }
        Ok(Self {
            width,
            height,
            occupancy,
            meters_per_pixel,
            origin: [0.0, 0.0],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn meters_per_pixel(&self) -> f64 {
        self.meters_per_pixel
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    /// World-space bounds covered by the raster.
    pub fn bounds(&self) -> Result<ProblemBounds> {
        let [ox, oy] = self.origin;
        ProblemBounds::new(
            StateVec::new(vec![ox, oy])?,
            StateVec::new(vec![
                ox + self.width as f64 * self.meters_per_pixel,
                oy + self.height as f64 * self.meters_per_pixel,
            ])?,
        )
    }

    /// Pixel index (column, row from the top) holding a world position.
    /// Positions on a pixel boundary belong to the lower index.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let col = boundary_low_index((x - self.origin[0]) / self.meters_per_pixel)?;
        let row_up = boundary_low_index((y - self.origin[1]) / self.meters_per_pixel)?;
        if col >= self.width || row_up >= self.height {
            return None;
        }
        Some((col, self.height - 1 - row_up))
    }

    pub fn is_occupied_cell(&self, col: usize, row: usize) -> bool {
        self.occupancy[row * self.width + col]
    }

    /// Grows every occupied cell by a disc of `radius_cells`.
    pub fn dilated(&self, radius_cells: usize) -> RasterMap {
        if radius_cells == 0 {
            return self.clone();
        }
        let r = radius_cells as isize;
        let offsets: Vec<(isize, isize)> = (-r..=r)
            .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
            .filter(|(dx, dy)| dx * dx + dy * dy <= r * r)
            .collect();
        let mut out = vec![false; self.occupancy.len()];
        let (w, h) = (self.width as isize, self.height as isize);
        for row in 0..h {
            for col in 0..w {
                if !self.occupancy[(row * w + col) as usize] {
                    continue;
                }
                for (dx, dy) in &offsets {
                    let (c, rr) = (col + dx, row + dy);
                    if c >= 0 && c < w && rr >= 0 && rr < h {
                        out[(rr * w + c) as usize] = true;
                    }
                }
            }
        }
        RasterMap {
            occupancy: out,
            ..self.clone()
        }
    }
}

fn boundary_low_index(v: f64) -> Option<usize> {
    if !(v >= 0.0) {
        return None;
    }
    let c = v.ceil();
    Some(if c == 0.0 { 0 } else { c as usize - 1 })
}

#[derive(Clone, Debug)]
pub enum Obstacles {
    Boxes(Vec<Aabb>),
    Raster(RasterMap),
}

/// Obstacle model with validity queries.
#[derive(Clone, Debug)]
pub struct Scene {
    bounds: ProblemBounds,
    obstacles: Obstacles,
    collision_segments: usize,
}

impl Scene {
    pub fn new(bounds: ProblemBounds, obstacles: Obstacles) -> Result<Self> {
        match &obstacles {
            Obstacles::Boxes(boxes) => {
                for b in boxes {
                    check_dim(bounds.dim(), b.min().dim())?;
                }
            }
            Obstacles::Raster(_) => check_dim(2, bounds.dim())?,
        }
        Ok(Self {
            bounds,
            obstacles,
            collision_segments: DEFAULT_COLLISION_SEGMENTS,
        })
    }

    /// Obstacle-free scene over `bounds`.
    pub fn empty(bounds: ProblemBounds) -> Self {
        Self {
            bounds,
            obstacles: Obstacles::Boxes(Vec::new()),
            collision_segments: DEFAULT_COLLISION_SEGMENTS,
        }
    }

    pub fn with_collision_segments(mut self, segments: usize) -> Result<Self> {
        if segments == 0 {
            return Err(Error::InvalidArgument("collision segments must be positive".into()));
        }
        self.collision_segments = segments;
        Ok(self)
    }

    pub fn bounds(&self) -> &ProblemBounds {
        &self.bounds
    }

    pub fn obstacles(&self) -> &Obstacles {
        &self.obstacles
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn collision_segments(&self) -> usize {
        self.collision_segments
    }

    /// Whether `x` lies inside the bounds and outside every obstacle.
    pub fn state_valid(&self, x: &StateVec) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.is_free(x.as_slice()))
    }

    #[inline]
    pub(crate) fn is_free(&self, x: &[f64]) -> bool {
        if !self.bounds.contains(x) {
            return false;
        }
        match &self.obstacles {
            Obstacles::Boxes(boxes) => !boxes.iter().any(|b| b.contains(x)),
            Obstacles::Raster(map) => match map.cell_of(x[0], x[1]) {
                Some((c, r)) => !map.is_occupied_cell(c, r),
                None => false,
            },
        }
    }

    fn free_at(&self, a: &[f64], b: &[f64], t: f64, buf: &mut [f64]) -> bool {
        for ((o, x), y) in buf.iter_mut().zip(a).zip(b) {
            *o = x + t * (y - x);
        }
        self.is_free(buf)
    }

    /// Checks `collision_segments + 1` evenly spaced points on the segment,
    /// endpoints included.
    pub fn edge_valid_full(&self, a: &StateVec, b: &StateVec) -> bool {
        debug_assert_eq!(a.dim(), b.dim());
        self.edge_free(a.as_slice(), b.as_slice())
    }

    pub(crate) fn edge_free(&self, a: &[f64], b: &[f64]) -> bool {
        if !self.is_free(a) || !self.is_free(b) {
            return false;
        }
        if dist(a, b) == 0.0 {
            return true;
        }
        let k = self.collision_segments;
        let mut buf = vec![0.0; a.len()];
        (1..k).all(|i| self.free_at(a, b, i as f64 / k as f64, &mut buf))
    }

    /// Incremental dyadic check of the interior of edge `(a_id, b_id)`.
    ///
    /// Level `L` covers the points `j / 2^L`. Only levels above the one
    /// recorded in `ledger` are evaluated; a level is recorded once all of its
    /// points pass. Returns false on the first colliding point.
    pub fn edge_check_sparse(
        &self,
        ledger: &mut SparseCheckLedger,
        a_id: usize,
        b_id: usize,
        a: &StateVec,
        b: &StateVec,
        target_level: u32,
    ) -> bool {
        debug_assert_eq!(a.dim(), b.dim());
        let (key, a, b) = if a_id <= b_id {
            ((a_id, b_id), a.as_slice(), b.as_slice())
        } else {
            ((b_id, a_id), b.as_slice(), a.as_slice())
        };
        let done = ledger.level(key.0, key.1);
        let mut buf = vec![0.0; a.len()];
        for level in done + 1..=target_level {
            let denom = (1u64 << level) as f64;
            for j in 0..(1u64 << (level - 1)) {
                ledger.points_evaluated += 1;
                if !self.free_at(a, b, (2 * j + 1) as f64 / denom, &mut buf) {
                    return false;
                }
            }
            ledger.levels.insert(key, level);
        }
        true
    }
}

/// Per-edge record of verified dyadic resolution.
#[derive(Clone, Debug, Default)]
pub struct SparseCheckLedger {
    levels: HashMap<(usize, usize), u32>,
    points_evaluated: u64,
}

impl SparseCheckLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Highest verified level for the undirected edge.
    pub fn level(&self, a: usize, b: usize) -> u32 {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.levels.get(&key).copied().unwrap_or(0)
    }

    /// Total interior points evaluated through this ledger.
    pub fn points_evaluated(&self) -> u64 {
        self.points_evaluated
    }

    pub fn clear(&mut self) {
        self.levels.clear();
    }
}

/// Parses a binary (P5) or ASCII (P2) grayscale PGM. Pixels with value below
/// `occupied_below` are obstacles.
pub fn load_raster_map(bytes: &[u8], meters_per_pixel: f64, occupied_below: u16) -> Result<RasterMap> {
    let mut cur = PgmCursor { bytes, pos: 0 };
    let magic_at = cur.pos;
    let magic = cur.token()?;
    let binary = match magic.as_slice() {
        b"P5" => true,
        b"P2" => false,
        _ => {
            return Err(Error::Parse {
                offset: magic_at,
                message: "expected PGM magic P2 or P5".into(),
            })
        }
    };
    let width = cur.number()?;
    let height = cur.number()?;
    let maxval_at = cur.pos;
    let maxval = cur.number()?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse {
            offset: maxval_at,
            message: format!("unsupported max value {maxval}"),
        });
    }
    if width == 0 || height == 0 {
        return Err(Error::Parse {
            offset: maxval_at,
            message: "zero-sized image".into(),
        });
    }
    let count = width * height;
    let mut occupancy = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(Error::Parse {
                offset: cur.pos,
                message: "missing separator before raster data".into(),
            });
        }
        let start = cur.pos + 1;
        let end = start + count;
        if end > bytes.len() {
            return Err(Error::Parse {
                offset: bytes.len(),
                message: format!("truncated raster: need {count} bytes, have {}", bytes.len() - start),
            });
        }
        occupancy.extend(bytes[start..end].iter().map(|&v| (v as u16) < occupied_below));
    } else {
        for _ in 0..count {
            let at = cur.pos;
            let v = cur.number()?;
            if v > maxval {
                return Err(Error::Parse {
                    offset: at,
                    message: format!("pixel {v} exceeds max value {maxval}"),
                });
            }
            occupancy.push((v as u64) < occupied_below as u64);
        }
    }
    RasterMap::new(width, height, occupancy, meters_per_pixel)
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl PgmCursor<'_> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<Vec<u8>> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse {
                offset: start,
                message: "unexpected end of input".into(),
            });
        }
        Ok(self.bytes[start..self.pos].to_vec())
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_space();
        let at = self.pos;
        let tok = self.token()?;
        std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::Parse {
                offset: at,
                message: format!("expected an unsigned integer, found {:?}", String::from_utf8_lossy(&tok)),
            })
    }
}
