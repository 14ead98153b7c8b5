use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{BenchmarkOutput, PlannerKind, TrialResult};
use crate::error::{Error, Result};

const CURVE_POINTS: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub time_s: f64,
    pub success_rate: f64,
    pub median_cost: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlannerSummary {
    pub planner: PlannerKind,
    pub domain: String,
    pub dim: usize,
    pub trials: usize,
    pub success_rate: f64,
    pub median_first_solution_time_s: Option<f64>,
    pub median_final_cost: Option<f64>,
    pub failed_with_error: usize,
    #[serde(skip)]
    pub curve: Vec<CurvePoint>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AggregateReport {
    pub summaries: Vec<PlannerSummary>,
}

impl AggregateReport {
    pub fn summary(&self, domain: &str, planner: PlannerKind) -> Option<&PlannerSummary> {
        self.summaries
            .iter()
            .find(|s| s.domain == domain && s.planner == planner)
    }
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
    }
}

/// 95% band for the median from order statistics (normal approximation to
/// the binomial).
fn median_band(sorted: &[f64]) -> Option<(f64, f64)> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let half = 1.96 * (n as f64).sqrt() / 2.0;
    let lo = ((n as f64 / 2.0 - half).floor() as isize).clamp(1, n as isize) as usize;
    let hi = ((n as f64 / 2.0 + half).ceil() as isize + 1).clamp(1, n as isize) as usize;
    Some((sorted[lo - 1], sorted[hi - 1]))
}

fn sorted_finite(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn log_grid(budget: f64) -> Vec<f64> {
    let hi = budget.max(1e-3);
    let lo = (hi * 1e-3).max(1e-4);
    (0..CURVE_POINTS)
        .map(|i| lo * (hi / lo).powf(i as f64 / (CURVE_POINTS - 1) as f64))
        .collect()
}

/// Per-(domain, planner) statistics. `budgets` gives each domain's budget.
pub fn aggregate(trials: &[TrialResult], budgets: &[(String, f64)]) -> AggregateReport {
    let mut summaries = Vec::new();
    for (domain, budget) in budgets {
        let mut planners: Vec<PlannerKind> = trials
            .iter()
            .filter(|t| &t.domain == domain)
            .map(|t| t.planner)
            .collect();
        planners.sort();
        planners.dedup();
        for planner in planners {
            let group: Vec<&TrialResult> = trials
                .iter()
                .filter(|t| &t.domain == domain && t.planner == planner)
                .collect();
            let n = group.len();
            let curve = log_grid(*budget)
                .into_iter()
                .map(|t| {
                    let costs = sorted_finite(group.iter().map(|r| r.cost_at(t)));
                    let band = median_band(&costs);
                    CurvePoint {
                        time_s: t,
                        success_rate: costs.len() as f64 / n as f64,
                        median_cost: median(&costs),
                        ci_low: band.map(|b| b.0),
                        ci_high: band.map(|b| b.1),
                    }
                })
                .collect();
            summaries.push(PlannerSummary {
                planner,
                domain: domain.clone(),
                dim: group[0].dim,
                trials: n,
                success_rate: group.iter().filter(|r| r.success).count() as f64 / n as f64,
                median_first_solution_time_s: median(&sorted_finite(
                    group.iter().filter_map(|r| r.first_solution_time_s),
                )),
                median_final_cost: median(&sorted_finite(group.iter().map(|r| r.final_cost))),
                failed_with_error: group.iter().filter(|r| r.error.is_some()).count(),
                curve,
            });
        }
    }
    AggregateReport { summaries }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `raw.csv`, `summary.json` and `<domain>/curve_<planner>.tsv`.
pub fn emit_outputs(output: &BenchmarkOutput, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let raw_path = out_dir.join("raw.csv");
    let mut w = csv::Writer::from_path(&raw_path).map_err(|e| Error::Io {
        path: raw_path.clone(),
        source: e.into(),
    })?;
    let csv_err = |e: csv::Error| Error::Io {
        path: raw_path.clone(),
        source: e.into(),
    };
    w.write_record([
        "planner",
        "domain",
        "dim",
        "seed",
        "event_time_s",
        "event_cost",
        "success",
        "first_solution_time_s",
        "final_cost",
    ])
    .map_err(csv_err)?;
    for t in &output.trials {
        let fixed = [
            t.planner.name().to_string(),
            t.domain.clone(),
            t.dim.to_string(),
            t.seed.to_string(),
        ];
        let tail = [
            t.success.to_string(),
            fmt_opt(t.first_solution_time_s),
            if t.final_cost.is_finite() {
                format!("{}", t.final_cost)
            } else {
                String::new()
            },
        ];
        let events: Vec<_> = t.solution_events().collect();
        if events.is_empty() {
            let row = fixed.iter().cloned().chain([String::new(), String::new()]).chain(tail.iter().cloned());
            w.write_record(row).map_err(csv_err)?;
        }
        for e in events {
            let row = fixed
                .iter()
                .cloned()
                .chain([format!("{}", e.wall_time_s), format!("{}", e.cost)])
                .chain(tail.iter().cloned());
            w.write_record(row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err(&raw_path))?;

    let summary_path = out_dir.join("summary.json");
    let json = serde_json::to_string_pretty(&output.report).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(&summary_path, json + "\n").map_err(io_err(&summary_path))?;

    for s in &output.report.summaries {
        let dir = out_dir.join(&s.domain);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join(format!("curve_{}.tsv", s.planner.name()));
        let mut text = String::from("time_s\tsuccess_rate\tmedian_cost\tci_low\tci_high\n");
        for p in &s.curve {
            text.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                p.time_s,
                p.success_rate,
                fmt_opt(p.median_cost),
                fmt_opt(p.ci_low),
                fmt_opt(p.ci_high)
            ));
        }
        fs::write(&path, text).map_err(io_err(&path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians_and_bands() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[1.0, 2.0, 9.0]), Some(2.0));
        assert_eq!(median(&[1.0, 2.0, 3.0, 9.0]), Some(2.5));
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let (lo, hi) = median_band(&v).unwrap();
        assert_eq!((lo, hi), (40.0, 61.0));
        assert_eq!(median_band(&[3.0]), Some((3.0, 3.0)));
    }

    #[test]
    fn grid_is_logarithmic() {
        let g = log_grid(5.0);
        assert_eq!(g.len(), CURVE_POINTS);
        assert!((g[CURVE_POINTS - 1] - 5.0).abs() < 1e-12);
        assert!((g[1] / g[0] - g[2] / g[1]).abs() < 1e-9);
    }
}
