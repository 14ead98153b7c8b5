use std::process::Command;

use bigit_cli::{parse_cli, DomainArg, PlannerArg, Switch};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bigit"))
}

#[test]
fn parses_high_dimensional_wall_gap() {
    let cli = parse_cli(["bigit", "--domain", "wallgap", "--dim", "16", "--budget", "100"]).unwrap();
    assert_eq!(cli.domain, DomainArg::Wallgap);
    assert_eq!(cli.dim, 16);
    assert_eq!(cli.budget, Some(100.0));
    assert_eq!(cli.planners, vec![PlannerArg::Bigit]);
    assert_eq!(cli.normalize_keys, Switch::Off);
    let config = cli.benchmark_config().unwrap();
    assert_eq!(config.domains[0].dim(), 16);
    assert_eq!(config.trials, 100);
}

#[test]
fn repeated_planner_flag() {
    let cli = parse_cli(["bigit", "--domain", "enclosure", "--planner", "bigit", "--planner", "bitstar"]).unwrap();
    assert_eq!(cli.planners, vec![PlannerArg::Bigit, PlannerArg::Bitstar]);
}

#[test]
fn map_needs_a_file() {
    let err = parse_cli(["bigit", "--domain", "map"]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(parse_cli(["bigit", "--domain", "wallgap", "--bogus"]).is_err());
}

#[test]
fn no_arguments_prints_help_and_exits_2() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stderr) + String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Usage"));
}

#[test]
fn unknown_flag_exits_2() {
    let out = bin().args(["--domain", "wallgap", "--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["--domain", "map"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_domain_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["--domain", "empty", "--planner", "bigit", "--planner", "bitstar", "--trials", "3"])
        .args(["--budget", "0.2", "--jobs", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let raw = std::fs::read_to_string(dir.path().join("raw.csv")).unwrap();
    assert!(raw.starts_with("planner,domain,dim,seed,event_time_s,event_cost,success,first_solution_time_s,final_cost\n"));
    assert!(raw.lines().skip(1).all(|l| l.contains(",true,")));
    for p in ["bigit", "bitstar"] {
        let curve = std::fs::read_to_string(dir.path().join("empty_r2").join(format!("curve_{p}.tsv"))).unwrap();
        assert!(curve.starts_with("time_s\tsuccess_rate\tmedian_cost\tci_low\tci_high\n"));
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"success_rate\": 1.0"));
}

#[test]
fn map_domain_from_pgm() {
    let dir = tempfile::tempdir().unwrap();
    // 40x40 free map with a vertical wall in the middle, open at the top
    let (w, h) = (40usize, 40usize);
    let mut pixels = vec![255u8; w * h];
    for row in 10..h {
        for col in 19..21 {
            pixels[row * w + col] = 0;
        }
    }
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.extend(&pixels);
    let map = dir.path().join("map.pgm");
    std::fs::write(&map, bytes).unwrap();
    let out = bin()
        .args(["--domain", "map", "--map-file"])
        .arg(&map)
        .args(["--meters-per-pixel", "0.5", "--start", "3,3", "--goal", "17,3", "--batch-size", "300"])
        .args(["--trials", "2", "--budget", "0.5", "--jobs", "1", "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let raw = std::fs::read_to_string(dir.path().join("out/raw.csv")).unwrap();
    assert!(raw.lines().skip(1).all(|l| l.starts_with("bigit,map_r2,2,")));
    assert!(raw.contains(",true,"));
}
