//! Vector states, bounds, the Euclidean metric, seeded randomness and informed
//! (prolate hyperspheroid) sampling.

use std::fmt;
use std::ops::Index;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A point in an n-dimensional configuration space (n >= 2).
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVec(Vec<f64>);

impl StateVec {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "states need at least two coordinates, got {}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    /// A state with every coordinate equal to `value`.
    pub fn splat(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for StateVec {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for StateVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Axis-aligned sampling bounds, `lower[i] < upper[i]` on every axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemBounds {
    lower: StateVec,
    upper: StateVec,
}

impl ProblemBounds {
    pub fn new(lower: StateVec, upper: StateVec) -> Result<Self> {
        check_dim(lower.dim(), upper.dim())?;
        for i in 0..lower.dim() {
            if !(lower[i] < upper[i]) {
                return Err(Error::InvalidArgument(format!(
                    "bounds axis {i}: lower {} is not below upper {}",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit hypercube `[0,1]^dim`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(StateVec::splat(dim, 0.0)?, StateVec::splat(dim, 1.0)?)
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &StateVec {
        &self.lower
    }

    pub fn upper(&self) -> &StateVec {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.as_slice().iter().zip(self.upper.as_slice()))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Lebesgue measure of the box.
    pub fn measure(&self) -> f64 {
        self.lower
            .as_slice()
            .iter()
            .zip(self.upper.as_slice())
            .map(|(lo, hi)| hi - lo)
            .product()
    }
}

/// Deterministic, splittable random stream (ChaCha8, counter based).
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent stream derived from the same seed.
    pub fn split(&self, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream.wrapping_add(1));
        Self {
            seed: self.seed,
            inner,
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// Euclidean distance between two states.
pub fn distance(a: &StateVec, b: &StateVec) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(dist(a.as_slice(), b.as_slice()))
}

/// `a + t (b - a)` for `t` in `[0, 1]`.
pub fn interpolate(a: &StateVec, b: &StateVec, t: f64) -> Result<StateVec> {
    check_dim(a.dim(), b.dim())?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "interpolation parameter {t} outside [0, 1]"
        )));
    }
    Ok(StateVec(lerp(a.as_slice(), b.as_slice(), t)))
}

#[inline]
pub(crate) fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Volume of the unit n-ball, `pi^(n/2) / Gamma(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let (mut v, start) = if n % 2 == 0 { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= n {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Uniform draw inside `bounds`, i.i.d. per axis.
pub fn sample_uniform(bounds: &ProblemBounds, rng: &mut RngStream) -> StateVec {
    let coords = bounds
        .lower
        .as_slice()
        .iter()
        .zip(bounds.upper.as_slice())
        .map(|(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
        .collect();
    StateVec(coords)
}

/// Sampler for the informed subset `{x : |x - start| + |x - goal| <= c_best}`.
#[derive(Clone, Debug)]
pub struct InformedSampler {
    focus_a: StateVec,
    focus_b: StateVec,
    center: Vec<f64>,
    c_min: f64,
    c_best: f64,
    /// Row-major n x n orthonormal frame; column 0 is the unit start->goal axis.
    rotation: Vec<f64>,
}

const MAX_INFORMED_REJECTIONS: usize = 1_000_000;

impl InformedSampler {
    pub fn new(start: &StateVec, goal: &StateVec, c_best: f64) -> Result<Self> {
        check_dim(start.dim(), goal.dim())?;
        let c_min = dist(start.as_slice(), goal.as_slice());
        if c_best.is_nan() || c_best < c_min {
            return Err(Error::InvalidArgument(format!(
                "informed cost {c_best} is below the focal distance {c_min}"
            )));
        }
        let n = start.dim();
        let center = lerp(start.as_slice(), goal.as_slice(), 0.5);
        let rotation = householder_frame(start.as_slice(), goal.as_slice(), c_min);
        Ok(Self {
            focus_a: start.clone(),
            focus_b: goal.clone(),
            center,
            c_min,
            c_best,
            rotation: {
                debug_assert_eq!(rotation.len(), n * n);
                rotation
            },
        })
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn c_best(&self) -> f64 {
        self.c_best
    }

    pub fn dim(&self) -> usize {
        self.focus_a.dim()
    }

    /// Row-major rotation matrix.
    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    /// Sum of distances to both foci.
    pub fn focal_sum(&self, x: &[f64]) -> f64 {
        dist(x, self.focus_a.as_slice()) + dist(x, self.focus_b.as_slice())
    }

    /// Lebesgue measure of the hyperspheroid (infinite when `c_best` is).
    pub fn measure(&self) -> f64 {
        if !self.c_best.is_finite() {
            return f64::INFINITY;
        }
        let n = self.dim();
        let conj = conjugate_radius(self.c_best, self.c_min);
        unit_ball_volume(n) * 0.5 * self.c_best * conj.powi(n as i32 - 1)
    }

    fn sample_direct(&self, rng: &mut RngStream) -> Vec<f64> {
        let n = self.dim();
        let ball = unit_ball_point(n, rng);
        let transverse = 0.5 * self.c_best;
        let conj = conjugate_radius(self.c_best, self.c_min);
        let scaled: Vec<f64> = ball
            .iter()
            .enumerate()
            .map(|(i, v)| v * if i == 0 { transverse } else { conj })
            .collect();
        (0..n)
            .map(|r| {
                let row = &self.rotation[r * n..(r + 1) * n];
                self.center[r] + row.iter().zip(&scaled).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }
}

fn conjugate_radius(c_best: f64, c_min: f64) -> f64 {
    0.5 * (c_best * c_best - c_min * c_min).max(0.0).sqrt()
}

/// Householder reflection mapping e1 onto the unit start->goal axis.
fn householder_frame(a: &[f64], b: &[f64], c_min: f64) -> Vec<f64> {
    let n = a.len();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    if c_min == 0.0 {
        return m;
    }
    let axis: Vec<f64> = a.iter().zip(b).map(|(x, y)| (y - x) / c_min).collect();
    let mut v = axis.iter().map(|x| -x).collect::<Vec<_>>();
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    if vv < 1e-30 {
        return m;
    }
    for r in 0..n {
        for c in 0..n {
            m[r * n + c] -= 2.0 * v[r] * v[c] / vv;
        }
    }
    m
}

/// Uniform point in the unit n-ball via a normalized Gaussian direction.
fn unit_ball_point(n: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let radius = rng.gen::<f64>().powf(1.0 / n as f64);
        return dir.into_iter().map(|x| x * radius / norm).collect();
    }
}

/// Draw uniformly from the informed set intersected with `bounds`.
///
/// With an infinite `c_best` this is [`sample_uniform`]. Otherwise the draw
/// comes from whichever of the two sets is smaller, rejecting against the
/// other one.
pub fn sample_informed(
    sampler: &InformedSampler,
    bounds: &ProblemBounds,
    rng: &mut RngStream,
) -> Result<StateVec> {
    check_dim(sampler.dim(), bounds.dim())?;
    if !sampler.c_best.is_finite() {
        return Ok(sample_uniform(bounds, rng));
    }
    let direct = sampler.measure() < bounds.measure();
    for _ in 0..MAX_INFORMED_REJECTIONS {
        if direct {
            let x = sampler.sample_direct(rng);
            if bounds.contains(&x) {
                return Ok(StateVec(x));
            }
        } else {
            let x = sample_uniform(bounds, rng);
            if sampler.focal_sum(x.as_slice()) <= sampler.c_best {
                return Ok(x);
            }
        }
    }
    Err(Error::InfeasibleSampling {
        attempts: MAX_INFORMED_REJECTIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(c: &[f64]) -> StateVec {
        StateVec::from_slice(c).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&sv(&[0.0, 0.0]), &sv(&[3.0, 4.0])).unwrap(), 5.0);
        let d = distance(&sv(&[0.2, 0.5]), &sv(&[0.8, 0.5])).unwrap();
        assert!((d - 0.6).abs() < 1e-12);
        let x = sv(&[0.3, 0.7, 0.1]);
        assert_eq!(distance(&x, &x).unwrap(), 0.0);
        assert!(matches!(
            distance(&sv(&[0.0, 0.0]), &sv(&[0.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn interpolate_examples() {
        let a = sv(&[0.0, 0.0]);
        let b = sv(&[1.0, 1.0]);
        assert_eq!(interpolate(&a, &b, 0.0).unwrap(), a);
        assert_eq!(interpolate(&a, &b, 1.0).unwrap(), b);
        assert_eq!(interpolate(&a, &b, 0.5).unwrap(), sv(&[0.5, 0.5]));
        assert!(interpolate(&a, &b, 1.5).is_err());
        assert!(interpolate(&a, &b, -0.1).is_err());
    }

    #[test]
    fn state_rejects_bad_input() {
        assert!(StateVec::new(vec![1.0]).is_err());
        assert!(StateVec::new(vec![1.0, f64::NAN]).is_err());
        assert!(ProblemBounds::new(sv(&[0.0, 1.0]), sv(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
        // pi^8 / 8!
        let v16 = std::f64::consts::PI.powi(8) / 40320.0;
        assert!((unit_ball_volume(16) - v16).abs() < 1e-12);
    }

    #[test]
    fn uniform_is_contained_and_deterministic() {
        let bounds = ProblemBounds::unit(2).unwrap();
        let mut r1 = RngStream::new(42);
        let mut r2 = RngStream::new(42);
        for _ in 0..100 {
            let a = sample_uniform(&bounds, &mut r1);
            let b = sample_uniform(&bounds, &mut r2);
            assert!(bounds.contains(a.as_slice()));
            assert_eq!(a.as_slice(), b.as_slice());
        }
    }

    #[test]
    fn uniform_mean_converges() {
        let bounds = ProblemBounds::unit(2).unwrap();
        let mut rng = RngStream::new(7);
        let mut sum = [0.0; 2];
        let n = 100_000;
        for _ in 0..n {
            let x = sample_uniform(&bounds, &mut rng);
            sum[0] += x[0];
            sum[1] += x[1];
        }
        for s in sum {
            assert!((s / n as f64 - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn split_streams_differ() {
        let base = RngStream::new(3);
        let mut a = base.split(0);
        let mut b = base.split(1);
        assert_ne!(a.next_u64(), b.next_u64());
        let mut again = base.split(0);
        let mut a2 = base.split(0);
        assert_eq!(again.next_u64(), a2.next_u64());
    }

    #[test]
    fn informed_infinite_is_uniform() {
        let bounds = ProblemBounds::unit(2).unwrap();
        let s = InformedSampler::new(&sv(&[0.2, 0.5]), &sv(&[0.8, 0.5]), f64::INFINITY).unwrap();
        let mut r1 = RngStream::new(5);
        let mut r2 = RngStream::new(5);
        let a = sample_informed(&s, &bounds, &mut r1).unwrap();
        let b = sample_uniform(&bounds, &mut r2);
        assert_eq!(a, b);
    }

    #[test]
    fn informed_membership() {
        let bounds = ProblemBounds::unit(2).unwrap();
        let s = InformedSampler::new(&sv(&[0.2, 0.5]), &sv(&[0.8, 0.5]), 0.7).unwrap();
        let mut rng = RngStream::new(11);
        for _ in 0..5000 {
            let x = sample_informed(&s, &bounds, &mut rng).unwrap();
            assert!(s.focal_sum(x.as_slice()) <= 0.7 + 1e-12);
            assert!(bounds.contains(x.as_slice()));
        }
    }

    #[test]
    fn informed_degenerate_lies_on_segment() {
        let bounds = ProblemBounds::unit(2).unwrap();
        let start = sv(&[0.2, 0.5]);
        let goal = sv(&[0.8, 0.5]);
        let c_min = distance(&start, &goal).unwrap();
        let s = InformedSampler::new(&start, &goal, c_min).unwrap();
        let mut rng = RngStream::new(13);
        for _ in 0..1000 {
            let x = sample_informed(&s, &bounds, &mut rng).unwrap();
            assert!((x[1] - 0.5).abs() < 1e-9);
            assert!(x[0] >= 0.2 - 1e-9 && x[0] <= 0.8 + 1e-9);
        }
    }

    #[test]
    fn informed_rejects_cost_below_focal_distance() {
        assert!(InformedSampler::new(&sv(&[0.2, 0.5]), &sv(&[0.8, 0.5]), 0.5).is_err());
    }

    #[test]
    fn rotation_is_orthonormal() {
        let mut rng = RngStream::new(99);
        for n in [2usize, 3, 8, 16] {
            let bounds = ProblemBounds::unit(n).unwrap();
            let a = sample_uniform(&bounds, &mut rng);
            let b = sample_uniform(&bounds, &mut rng);
            let s = InformedSampler::new(&a, &b, 2.0).unwrap();
            let r = s.rotation();
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = (0..n).map(|k| r[k * n + i] * r[k * n + j]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-9);
                }
            }
            // first column is the focal axis
            let c = s.c_min();
            for k in 0..n {
                assert!((r[k * n] - (b[k] - a[k]) / c).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn informed_covers_both_regimes_in_high_dim() {
        // Large c_best: the box is smaller, rejection happens on the ellipse.
        let bounds = ProblemBounds::unit(8).unwrap();
        let start = StateVec::splat(8, 0.4).unwrap();
        let goal = StateVec::splat(8, 0.6).unwrap();
        let mut rng = RngStream::new(1);
        for c_best in [0.7, 3.0] {
            let s = InformedSampler::new(&start, &goal, c_best).unwrap();
            for _ in 0..200 {
                let x = sample_informed(&s, &bounds, &mut rng).unwrap();
                assert!(s.focal_sum(x.as_slice()) <= c_best + 1e-12);
                assert!(bounds.contains(x.as_slice()));
            }
        }
    }
}
