use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use modseq_cli::campaign::{run_campaign, RunError};
use modseq_cli::config::{CampaignConfig, Format, PlotKind};
use modseq_cli::output::{write_result, OutputError};

/// Runs one numerical campaign described by a JSON file.
///
/// Exit codes: 0 all checks hold, 1 a check is violated, 2 invalid
/// configuration, 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "modseq", version)]
struct Args {
    /// Campaign configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, env = "MODSEQ_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Extra plot series to write; may be repeated.
    #[arg(long = "plot", value_enum)]
    plots: Vec<PlotKind>,
}

const EXIT_VIOLATED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match CampaignConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(j) = args.jobs {
        config.jobs = Some(j);
    }
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let result = match run_campaign(&config) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    for o in &result.summary {
        let status = if o.passed { "PASS" } else { "FAIL" };
        match o.bound {
            Some(b) => println!("{status} {} value={:e} bound={:e}", o.name, o.value, b),
            None => println!("{status} {} value={:e}", o.name, o.value),
        }
    }
    let dir = args
        .out
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let format = args.format.or(config.output.format).unwrap_or(Format::Both);
    let mut plots = config.output.plots.clone();
    plots.extend(args.plots.iter().copied().filter(|p| !config.output.plots.contains(p)));
    match write_result(&result, &dir, format, &plots) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(OutputError::Run(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    if result.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATED)
    }
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        RunError::Numerical(_) => ExitCode::from(EXIT_NUMERICAL),
        _ => ExitCode::from(EXIT_CONFIG),
    }
}
