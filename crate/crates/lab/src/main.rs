use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use proxgeo_lab::{config, scenarios, ConfigError, ExperimentConfig, Report};

#[derive(Parser)]
#[command(name = "lab", version, about = "Run proxgeo scenarios and write JSON/CSV reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, or `all` of them in order.
    Run {
        scenario: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default `lab-out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Maximum number of worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List scenarios and the modules they cover.
    List,
    /// Parse and validate an experiment file without running it.
    CheckConfig { file: PathBuf },
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for s in scenarios::scenarios() {
                println!("{:<28} {}", s.name, s.summary);
                println!("{:<28} modules: {}", "", s.modules.join(", "));
            }
            ExitCode::SUCCESS
        }
        Command::CheckConfig { file } => match check_config(&file) {
            Ok(msg) => {
                println!("{msg}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Run { scenario, config, seed, out, jobs } => match run(&scenario, config.as_deref(), seed, out, jobs) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(EXIT_FAIL),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
    }
}

fn check_config(file: &Path) -> Result<String, ConfigError> {
    let cfg = config::load_config(file)?;
    match &cfg.scenario {
        Some(name) => {
            scenarios::prepare(scenarios::find(name)?, &cfg)?;
            Ok(format!("{}: ok for {name}", file.display()))
        }
        None => Ok(format!("{}: ok (no scenario named; manifold and set are checked at run time)", file.display())),
    }
}

fn run(name: &str, config: Option<&Path>, seed: Option<u64>, out: Option<PathBuf>, jobs: Option<usize>) -> Result<bool, ConfigError> {
    let mut cfg = match config {
        Some(p) => config::load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if seed.is_some() {
        cfg.seed = seed;
    }
    let out = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("lab-out"));
    if let Some(k) = jobs {
        if k == 0 {
            return Err(ConfigError::invalid("--jobs", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| ConfigError::invalid("--jobs", e.to_string()))?;
    }
    let selected: Vec<&scenarios::Scenario> = if name == "all" {
        if cfg.manifold.is_some() || cfg.set.is_some() || cfg.scenario.is_some() {
            return Err(ConfigError::invalid("scenario", "`all` takes no manifold, set or scenario override"));
        }
        scenarios::scenarios().iter().collect()
    } else {
        vec![scenarios::find(name)?]
    };
    // Validate everything before running anything.
    let prepared = selected.iter().map(|s| scenarios::prepare(s, &cfg).map(|p| (*s, p))).collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
    let coverage = serde_json::to_string_pretty(&scenarios::coverage_json()).expect("coverage serializes") + "\n";
    std::fs::write(out.join("coverage.json"), coverage).map_err(|e| io_error(&out, e))?;
    let mut all_pass = true;
    for (s, (ctx, setup)) in prepared {
        let report = scenarios::run(s, &ctx, setup);
        report.write_artifacts(&out).map_err(|e| io_error(&out, e))?;
        print_report(&report);
        all_pass &= report.pass;
    }
    Ok(all_pass)
}

fn io_error(path: &Path, e: std::io::Error) -> ConfigError {
    ConfigError::Io { path: path.display().to_string(), source: e }
}

fn print_report(r: &Report) {
    println!("{} (seed {})", r.scenario, r.seed);
    for c in &r.checks {
        println!("  {:<4} {:<44} {:>12.4e}  tol {:.1e}", c.status.to_string(), c.name, c.measured, c.tolerance);
    }
    println!("  => {}", if r.pass { "PASS" } else { "FAIL" });
}
