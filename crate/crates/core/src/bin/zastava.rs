use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use zastava::charts::{bracket_field, flow_integrate, BracketFamily, Hamiltonian};
use zastava::transform::{rational_limit_check, trigonometric_limit_check};
use zastava::verify::{
    bracket_matrix_json, emit_report, family_by_name, load_config, parse_chart_point, run_suites, sample_chart_point,
    sample_four_points, sample_rng, ReportFormat, RunOptions, Suite,
};
use zastava::{Error, Result};

#[derive(Parser)]
#[command(name = "zastava", version, about = "Numerical checks of elliptic zastava brackets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and emit a report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Suite to run; repeat to select several (default: the configured ones).
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads per suite.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Print the bracket matrix at a chart point.
    Brackets {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
    /// Integrate a Hamiltonian flow and print the trajectory.
    Flow {
        #[arg(long)]
        config: PathBuf,
        /// `moment:<vertex>`, `const[:<re>]` or a coordinate such as `Y[1,1]`.
        #[arg(long)]
        hamiltonian: String,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Bracket family; defaults to `coulomb` for moment Hamiltonians and
        /// `elliptic_fo` otherwise.
        #[arg(long)]
        family: Option<String>,
        /// Starting point; sampled from the seed when absent.
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Degeneration errors along a ladder of `eps` (rational) or `Im tau`
    /// (trigonometric) values.
    Limits {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        ladder: Vec<f64>,
        #[arg(long, default_value = "rational")]
        kind: String,
    },
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify {
            config,
            suites,
            seed,
            format,
            out,
            parallel,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if !suites.is_empty() {
                cfg.suites = suites.iter().map(|s| s.parse()).collect::<Result<Vec<Suite>>>()?;
            }
            let format: ReportFormat = format.parse()?;
            let report = run_suites(&cfg, RunOptions { parallel });
            let text = emit_report(&report, format)?;
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(report.passed)
        }
        Command::Brackets { config, point } => {
            let cfg = load_config(&config)?;
            let (family, point) = parse_chart_point(&cfg, &std::fs::read_to_string(point)?)?;
            let field = bracket_field(&family, &point)?;
            let mut doc = bracket_matrix_json(field.matrix());
            doc["family"] = json!(family.name());
            doc["antisymmetry_residual"] = json!(field.matrix().antisymmetry_residual());
            print_json(&doc)?;
            Ok(true)
        }
        Command::Flow {
            config,
            hamiltonian,
            t,
            steps,
            family,
            point,
        } => {
            let cfg = load_config(&config)?;
            let (family, start) = match point {
                Some(path) => parse_chart_point(&cfg, &std::fs::read_to_string(path)?)?,
                None => {
                    let name = family.unwrap_or_else(|| {
                        if hamiltonian.starts_with("moment:") { "coulomb" } else { "elliptic_fo" }.to_string()
                    });
                    let family: BracketFamily = family_by_name(&cfg, &name)?;
                    let p = sample_chart_point(&cfg, &family)?;
                    (family, p)
                }
            };
            let h = Hamiltonian::parse(&hamiltonian, &start)?;
            let report = flow_integrate(&family, &start, &h, t, steps)?;
            let mut doc = serde_json::to_value(&report).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            doc["family"] = json!(family.name());
            print_json(&doc)?;
            Ok(true)
        }
        Command::Limits { config, ladder, kind } => {
            let cfg = load_config(&config)?;
            if ladder.len() < 2 {
                return Err(Error::InvalidArgument("the ladder needs at least two values".into()));
            }
            let four = sample_four_points(&mut sample_rng(cfg.seed, u64::MAX >> 24, 1), 0.05)?;
            let report = match kind.as_str() {
                "rational" => rational_limit_check(&cfg.mp, &four, &ladder)?,
                "trigonometric" => trigonometric_limit_check(&four, cfg.tau().re, &ladder)?,
                other => return Err(Error::InvalidArgument(format!("unknown limit `{other}`"))),
            };
            let mut doc = serde_json::to_value(&report).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            doc["points"] = serde_json::to_value(four).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            print_json(&doc)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
