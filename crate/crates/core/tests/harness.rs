use bigit_core::bench::{
    empty, emit_outputs, run_benchmark, run_trial, wall_gap, BenchmarkConfig, PlannerKind, PlannerSettings,
};
use bigit_core::Budget;

fn config(domain: &str, planners: Vec<PlannerKind>, trials: usize, budget_s: f64, max_batches: Option<usize>) -> BenchmarkConfig {
    let domain = match domain {
        "empty" => empty(2).unwrap(),
        _ => wall_gap(2).unwrap(),
    };
    BenchmarkConfig {
        domains: vec![domain],
        planners,
        settings: PlannerSettings {
            max_batches,
            ..PlannerSettings::default()
        },
        trials,
        seed_base: 0,
        budget_s: Some(budget_s),
        jobs: 2,
    }
}

#[test]
fn empty_domain_trial_reaches_c_min() {
    let domain = empty(2).unwrap();
    for kind in [PlannerKind::Bigit, PlannerKind::Bitstar] {
        let t = run_trial(&domain, kind, &PlannerSettings::default(), 3, Budget::seconds(0.5));
        assert!(t.success);
        assert!((t.final_cost - 0.6).abs() < 1e-9);
        assert!(t.error.is_none());
    }
}

#[test]
fn zero_budget_trial_fails_cleanly() {
    let domain = wall_gap(2).unwrap();
    let t = run_trial(&domain, PlannerKind::Bigit, &PlannerSettings::default(), 0, Budget::seconds(0.0));
    assert!(!t.success);
    assert!(t.events.is_empty());
    assert!(t.final_cost.is_infinite());
    assert!(t.first_solution_time_s.is_none());
}

#[test]
fn same_seed_same_costs() {
    let domain = wall_gap(2).unwrap();
    let settings = PlannerSettings::default();
    let costs = |seed| {
        run_trial(&domain, PlannerKind::Bigit, &settings, seed, Budget::batches(6))
            .solution_events()
            .map(|e| e.cost)
            .collect::<Vec<_>>()
    };
    assert_eq!(costs(4), costs(4));
}

#[test]
fn ten_empty_trials_all_succeed() {
    let out = run_benchmark(&config("empty", vec![PlannerKind::Bigit], 10, 0.3, None)).unwrap();
    assert_eq!(out.trials.len(), 10);
    let s = out.report.summary("empty_r2", PlannerKind::Bigit).unwrap();
    assert_eq!(s.success_rate, 1.0);
    for t in &out.trials {
        let costs: Vec<f64> = t.solution_events().map(|e| e.cost).collect();
        assert!(costs.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn single_event_gives_a_single_row() {
    let out = run_benchmark(&config("empty", vec![PlannerKind::Bigit], 1, 5.0, Some(1))).unwrap();
    assert_eq!(out.trials[0].solution_events().count(), 1);
    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&out, dir.path()).unwrap();
    let raw = std::fs::read_to_string(dir.path().join("raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 2);
    assert!(raw.lines().nth(1).unwrap().starts_with("bigit,empty_r2,2,0,"));
}

#[test]
fn unsolved_domain_has_zero_success_curve() {
    let out = run_benchmark(&config("wallgap", vec![PlannerKind::Bigit, PlannerKind::Bitstar], 3, 0.0, None)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&out, dir.path()).unwrap();
    for p in ["bigit", "bitstar"] {
        let curve = std::fs::read_to_string(dir.path().join("wallgap_r2").join(format!("curve_{p}.tsv"))).unwrap();
        let rows: Vec<&str> = curve.lines().skip(1).collect();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.split('\t').nth(1) == Some("0")), "{curve}");
    }
    let raw = std::fs::read_to_string(dir.path().join("raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 7);
    assert!(raw.lines().skip(1).all(|l| l.contains(",false,")));
}

fn cost_columns(raw: &str) -> Vec<String> {
    raw.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            format!("{},{},{},{},{}", f[0], f[3], f[5], f[6], f[8])
        })
        .collect()
}

#[test]
fn reruns_write_identical_cost_columns() {
    let cfg = config("wallgap", vec![PlannerKind::Bigit, PlannerKind::Bitstar], 3, 60.0, Some(5));
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut raws = Vec::new();
    for (i, dir) in dirs.iter().enumerate() {
        let cfg = BenchmarkConfig { jobs: 1 + 2 * i, ..cfg.clone() };
        emit_outputs(&run_benchmark(&cfg).unwrap(), dir.path()).unwrap();
        raws.push(std::fs::read_to_string(dir.path().join("raw.csv")).unwrap());
    }
    assert_eq!(cost_columns(&raws[0]), cost_columns(&raws[1]));
}
