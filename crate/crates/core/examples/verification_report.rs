//! Runs every verification suite on a D4 configuration and prints the text
//! report. Pass a seed as the first argument to change the samples.

use zastava::verify::{emit_report, parse_config, run_suites, ReportFormat, RunOptions};

const CONFIG: &str = r#"{
    "tau": "1/2+i",
    "quiver": "D4",
    "alpha": {"1": 2, "2": 2, "3": 1, "4": 2},
    "samples": {"jacobi": 4, "pushforward": 10, "flows": 4}
}"#;

fn main() -> zastava::Result<()> {
    let mut cfg = parse_config(CONFIG)?;
    if let Some(seed) = std::env::args().nth(1) {
        cfg.seed = seed.parse().map_err(|_| zastava::Error::InvalidArgument(format!("bad seed `{seed}`")))?;
    }
    let report = run_suites(&cfg, RunOptions { parallel: 4 });
    print!("{}", emit_report(&report, ReportFormat::Text)?);
    for suite in &report.suites {
        if let Some(worst) = &suite.worst {
            println!("{:<22} worst check {} = {:.2e}", suite.suite, worst.check, worst.value.unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
