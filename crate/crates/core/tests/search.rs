mod common;

use std::collections::HashSet;

use bigit_core::search::{DirectionalSearch, EdgeOutcome, Gate};
use bigit_core::{ConnectionMode, ConnectionParam, ConnectionStrategy, ProblemBounds, Rgg, SampleSet, Scene, GOAL_ID, START_ID};
use common::sv;

const X: usize = 2;
const X2: usize = 3;

/// start 0, x 0.6, x' 0.8, goal 1.1 on a line; the radius links only
/// consecutive states, besides the start-goal edge.
fn line() -> (Rgg, Scene) {
    let samples = SampleSet::new(sv(&[0.0, 0.5]), sv(&[1.1, 0.5])).unwrap();
    let strategy = ConnectionStrategy::new(ConnectionMode::RDisc, 1.001, 2, 0.637).unwrap();
    let mut rgg = Rgg::new(samples, strategy).unwrap();
    rgg.add_states(vec![sv(&[0.6, 0.5]), sv(&[0.8, 0.5])], 0).unwrap();
    match rgg.param() {
        ConnectionParam::Radius(r) => assert!(r > 0.6 && r < 0.8, "{r}"),
        other => panic!("{other:?}"),
    }
    let bounds = ProblemBounds::new(sv(&[0.0, 0.0]), sv(&[2.0, 2.0])).unwrap();
    (rgg, Scene::empty(bounds))
}

#[test]
fn expand_vertex_gates() {
    let (rgg, scene) = line();
    let mut invalid = HashSet::new();
    let mut fwd = DirectionalSearch::new(START_ID, GOAL_ID, rgg.samples().len(), Gate::Bidirectional);
    fwd.restart(&rgg, &invalid, f64::INFINITY);
    assert_eq!(fwd.queue.len(), 2);

    // g(x) = 0.6 after this; x' has key 0.6 + 0.2 + 0.3 = 1.1 > 1.0 and
    // 0.6 > 1.0 / 2, so it must not be queued
    let edge = fwd.queue.pop().unwrap();
    assert_eq!((edge.source, edge.target), (START_ID, X));
    assert!(matches!(fwd.process(&rgg, &scene, &mut invalid, edge, 1.0), EdgeOutcome::Improved(_)));
    assert!((fwd.tree.g(X) - 0.6).abs() < 1e-12);
    assert!(!fwd.queue.contains(X, X2));

    // no incumbent: the improving neighbor goes in, with its key
    assert_eq!(fwd.expand(&rgg, &invalid, X, f64::INFINITY), 1);
    assert!(fwd.queue.contains(X, X2));
    assert!((fwd.tree.g_hat(X2) - 0.8).abs() < 1e-12);

    // ĝ(x') is already 0.8: nothing improves
    assert_eq!(fwd.expand(&rgg, &invalid, X, f64::INFINITY), 0);
}

#[test]
fn min_key_direction_is_processed() {
    let (rgg, _) = line();
    let invalid = HashSet::new();
    let mut fwd = DirectionalSearch::new(START_ID, GOAL_ID, rgg.samples().len(), Gate::Bidirectional);
    let mut bwd = DirectionalSearch::new(GOAL_ID, START_ID, rgg.samples().len(), Gate::Bidirectional);
    fwd.restart(&rgg, &invalid, f64::INFINITY);
    bwd.restart(&rgg, &invalid, f64::INFINITY);
    // both heads sit on the optimal line, so both keys equal c_min
    assert!((fwd.queue.min_key() - 1.1).abs() < 1e-12);
    assert!((bwd.queue.min_key() - 1.1).abs() < 1e-12);
    let head = bwd.queue.peek().unwrap();
    assert_eq!(head.target, X2);
}
