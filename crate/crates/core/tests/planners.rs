mod common;

use bigit_core::baseline::{bit_star_plan, BitStarConfig, BitStarPlanner};
use bigit_core::bench::wall_gap;
use bigit_core::bigit::{plan, BigitConfig, BigitPlanner};
use bigit_core::search::Direction;
use bigit_core::{
    path_cost, AnytimePlanner, Aabb, Budget, ConnectionMode, Obstacles, Problem, ProblemBounds, Scene, GOAL_ID, START_ID,
};
use common::{free_states, oracle_cost, run_to_quiescence, sv};

const A: usize = 2;

fn chain(scene: Scene, a: &[f64]) -> BigitPlanner {
    let problem = Problem::new(scene, sv(&[0.2, 0.5]), sv(&[0.8, 0.5])).unwrap();
    BigitPlanner::with_states(problem, BigitConfig::default(), vec![sv(a)]).unwrap()
}

fn unit() -> Scene {
    Scene::empty(ProblemBounds::unit(2).unwrap())
}

#[test]
fn lazy_chain_meets_at_cost_0_6() {
    let mut p = chain(unit(), &[0.5, 0.5]);
    p.step().unwrap();
    p.step().unwrap();
    let lazy = p.lazy().expect("lazy search ran");
    assert!((lazy.u_lazy() - 0.6).abs() < 1e-12);
    assert!((lazy.g(Direction::Forward, A) - 0.3).abs() < 1e-12);
}

fn walled() -> Scene {
    let wall = Aabb::new(sv(&[0.45, 0.3]), sv(&[0.55, 0.6])).unwrap();
    Scene::new(ProblemBounds::unit(2).unwrap(), Obstacles::Boxes(vec![wall])).unwrap()
}

#[test]
fn lazy_search_drops_a_sparse_failure_and_meets_in_the_middle() {
    let mut p = chain(walled(), &[0.5, 0.7]);
    p.step().unwrap();
    p.step().unwrap();
    let lazy = p.lazy().unwrap();
    let half = (0.3f64 * 0.3 + 0.2 * 0.2).sqrt();
    assert!((lazy.u_lazy() - 2.0 * half).abs() < 1e-12);
    assert!(lazy.meeting_set().contains(&A));
    assert!((lazy.g(Direction::Forward, A) - half).abs() < 1e-12);
    assert!((lazy.g(Direction::Backward, A) - half).abs() < 1e-12);
}

#[test]
fn guidance_on_the_chain() {
    let mut p = chain(unit(), &[0.5, 0.5]);
    p.step().unwrap();
    p.step().unwrap();
    let to_goal = |id| p.record(id, Direction::Forward).h_guid.unwrap();
    assert!((to_goal(START_ID) - 0.6).abs() < 1e-12);
    assert!((to_goal(A) - 0.3).abs() < 1e-12);
    let to_start = |id| p.record(id, Direction::Backward).h_guid.unwrap();
    assert!((to_start(GOAL_ID) - 0.6).abs() < 1e-12);
}

#[test]
fn blocked_direct_edge_routes_through_the_middle_state() {
    let scene = walled();
    let mut p = chain(scene.clone(), &[0.5, 0.7]);
    run_to_quiescence(&mut p);
    let expected = 2.0 * (0.3f64 * 0.3 + 0.2 * 0.2).sqrt();
    assert!((p.best_cost() - expected).abs() < 1e-12);
    let path = p.best_path().unwrap().unwrap();
    assert_eq!(path, vec![sv(&[0.2, 0.5]), sv(&[0.5, 0.7]), sv(&[0.8, 0.5])]);
    assert!((path_cost(&path) - p.best_cost()).abs() < 1e-9);
    assert!(path.windows(2).all(|w| scene.edge_valid_full(&w[0], &w[1])));
    let meet = p.meet().unwrap();
    let via_meet = p.tree_g(Direction::Forward, meet) + p.tree_g(Direction::Backward, meet);
    assert!((via_meet - p.best_cost()).abs() < 1e-9);
}

#[test]
fn empty_scene_both_planners_find_the_straight_line() {
    let problem = Problem::new(unit(), sv(&[0.2, 0.5]), sv(&[0.8, 0.5])).unwrap();
    let r = plan(problem.clone(), BigitConfig::default(), Budget::seconds(1.0), 7).unwrap();
    assert!((r.cost - 0.6).abs() < 1e-9);
    assert!(r.first_solution_time().unwrap() < 0.1);
    assert_eq!(r.path.unwrap().len(), 2);
    let r = bit_star_plan(problem, BitStarConfig::default(), Budget::seconds(1.0), 7).unwrap();
    assert!((r.cost - 0.6).abs() < 1e-9);
}

#[test]
fn no_budget_means_no_solution() {
    let domain = wall_gap(2).unwrap();
    let r = plan(domain.problem, BigitConfig::default(), Budget::seconds(0.0), 0).unwrap();
    assert!(!r.solved());
    assert!(r.path.is_none());
    assert!(r.events.is_empty());
}

#[test]
fn wall_gap_runs_are_anytime_and_valid() {
    let domain = wall_gap(2).unwrap();
    let scene = &domain.problem.scene;
    for seed in 0..3 {
        let bigit = plan(domain.problem.clone(), BigitConfig::default(), Budget::batches(15), seed).unwrap();
        let bit = bit_star_plan(domain.problem.clone(), BitStarConfig::default(), Budget::batches(15), seed).unwrap();
        for r in [bigit, bit] {
            assert!(r.solved(), "{} seed {seed}", r.planner);
            let costs: Vec<f64> = r.events.iter().filter(|e| e.kind.is_solution()).map(|e| e.cost).collect();
            assert!(costs.windows(2).all(|w| w[1] < w[0]), "{costs:?}");
            assert_eq!(*costs.last().unwrap(), r.cost);
            let path = r.path.unwrap();
            assert_eq!(path.first(), Some(&domain.problem.start));
            assert_eq!(path.last(), Some(&domain.problem.goal));
            assert!(path.windows(2).all(|w| scene.edge_valid_full(&w[0], &w[1])));
            assert!((path_cost(&path) - r.cost).abs() < 1e-9);
        }
    }
}

#[test]
fn batch_capped_runs_repeat_exactly() {
    let domain = wall_gap(2).unwrap();
    let costs = |r: bigit_core::PlanResult| r.events.iter().map(|e| (e.kind, e.cost.to_bits())).collect::<Vec<_>>();
    let a = plan(domain.problem.clone(), BigitConfig::default(), Budget::batches(8), 11).unwrap();
    let b = plan(domain.problem.clone(), BigitConfig::default(), Budget::batches(8), 11).unwrap();
    assert_eq!(costs(a), costs(b));
}

#[test]
fn frozen_graphs_settle_on_the_oracle_cost() {
    let domain = wall_gap(2).unwrap();
    let scene = &domain.problem.scene;
    for seed in 0..8 {
        let states = free_states(&domain.problem, 20 + 4 * seed as usize, 100 + seed);
        for connection in [ConnectionMode::Knn, ConnectionMode::RDisc] {
            let config = BigitConfig { connection, ..BigitConfig::default() };
            let mut bigit = BigitPlanner::with_states(domain.problem.clone(), config, states.clone()).unwrap();
            run_to_quiescence(&mut bigit);
            let expected = oracle_cost(bigit.rgg(), scene);

            let config = BitStarConfig { connection, ..BitStarConfig::default() };
            let mut bit = BitStarPlanner::with_states(domain.problem.clone(), config, states.clone()).unwrap();
            run_to_quiescence(&mut bit);
            assert_eq!(oracle_cost(bit.rgg(), scene).to_bits(), expected.to_bits());

            for got in [bigit.best_cost(), bit.best_cost()] {
                assert!(got == expected || (got - expected).abs() < 1e-9, "seed {seed}: {got} vs {expected}");
            }
        }
    }
}
