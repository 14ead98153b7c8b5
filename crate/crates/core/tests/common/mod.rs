#![allow(dead_code)]

use bigit_core::baseline::{dijkstra_rgg_oracle, ExplicitGraph};
use bigit_core::planner::AnytimePlanner;
use bigit_core::{sample_uniform, Problem, Rgg, RngStream, Scene, Step, StateVec, GOAL_ID, START_ID};

pub fn sv(c: &[f64]) -> StateVec {
    StateVec::from_slice(c).unwrap()
}

/// `n` free uniform states of the problem's scene.
pub fn free_states(problem: &Problem, n: usize, seed: u64) -> Vec<StateVec> {
    let mut rng = RngStream::new(seed);
    let scene = &problem.scene;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = sample_uniform(scene.bounds(), &mut rng);
        if scene.state_valid(&x).unwrap() {
            out.push(x);
        }
    }
    out
}

/// Collision-aware shortest start-goal cost on the planner's graph.
pub fn oracle_cost(rgg: &Rgg, scene: &Scene) -> f64 {
    let mut graph = ExplicitGraph::from_samples(rgg.samples(), rgg.strategy());
    graph.check_edges(scene);
    dijkstra_rgg_oracle(&graph, START_ID, true, scene)[GOAL_ID]
}

/// Steps until the planner reports it is done.
pub fn run_to_quiescence<P: AnytimePlanner>(p: &mut P) {
    for _ in 0..10_000_000 {
        if p.step().unwrap() == Step::Finished {
            return;
        }
    }
    panic!("planner did not settle");
}
