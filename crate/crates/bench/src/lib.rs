//! Fixtures shared by the criterion benches.

use bigit_core::bench::Domain;
use bigit_core::{ConnectionStrategy, Result, Rgg, RngStream, SampleSet, StateVec};

/// A graph over `n` free uniform samples of the domain.
pub fn uniform_graph(domain: &Domain, n: usize, seed: u64) -> Result<Rgg> {
    let problem = &domain.problem;
    let samples = SampleSet::new(problem.start.clone(), problem.goal.clone())?;
    let strategy = ConnectionStrategy::new(domain.connection, 1.001, domain.dim(), problem.scene.bounds().measure())?;
    let mut rgg = Rgg::new(samples, strategy)?;
    let mut rng = RngStream::new(seed);
    rgg.add_batch(n, f64::INFINITY, &problem.scene, 0, &mut rng)?;
    Ok(rgg)
}

/// Pairs of states `stride` apart in sample order, for edge-check benches.
pub fn state_pairs(rgg: &Rgg, count: usize, stride: usize) -> Vec<(StateVec, StateVec)> {
    let n = rgg.samples().len();
    (0..count)
        .map(|i| {
            let a = i % n;
            let b = (i + stride) % n;
            (rgg.samples().state(a).clone(), rgg.samples().state(b).clone())
        })
        .collect()
}
