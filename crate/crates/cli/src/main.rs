use std::process::ExitCode;

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.6}"))
}

fn main() -> ExitCode {
    let cli = match bigit_cli::parse_cli(std::env::args_os()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match bigit_cli::run(&cli) {
        Ok(out) => {
            println!("planner\tdomain\tsuccess_rate\tmedian_first_solution_s\tmedian_final_cost");
            for s in &out.report.summaries {
                println!(
                    "{}\t{}\t{:.3}\t{}\t{}",
                    s.planner.name(),
                    s.domain,
                    s.success_rate,
                    fmt(s.median_first_solution_time_s),
                    fmt(s.median_final_cost)
                );
            }
            println!("wrote {}", cli.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
