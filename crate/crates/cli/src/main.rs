use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser};
use frechet_frames_cli::{presets, run_with, write_outputs, ExperimentConfig, RunError};

/// Run a frame experiment and write JSON and CSV reports.
///
/// Exit status is 0 when every step passes, 1 when some step fails and 2
/// on any error.
#[derive(Debug, Parser)]
#[command(name = "frechet-frames", version)]
#[command(group(ArgGroup::new("input").required(true).args(["config", "preset"])))]
struct Args {
    /// Experiment config (JSON).
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Built-in config instead of a file.
    #[arg(short, long, value_parser = clap::builder::PossibleValuesParser::new(presets::NAMES))]
    preset: Option<String>,

    /// Directory for the report files.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,

    /// Replaces the config's seed.
    #[arg(short, long)]
    seed: Option<u64>,

    /// Print progress to stderr; repeat for per-step results.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn load(args: &Args) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => presets::preset(name).expect("clap checked the name"),
        (None, None) => unreachable!("clap requires one input"),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).and_then(|cfg| {
        let total = cfg.pipeline.len();
        let mut last = Instant::now();
        let report = run_with(&cfg, |i, op| {
            if args.verbose > 0 {
                if i > 0 {
                    eprintln!("    {:.2}s", last.elapsed().as_secs_f64());
                }
                eprintln!("[{}/{total}] {op}", i + 1);
                last = Instant::now();
            }
        })?;
        let written = write_outputs(&report, &cfg.outputs, &args.out)?;
        Ok((report, written))
    });
    match result {
        Ok((report, written)) => {
            if args.verbose > 1 {
                for s in &report.steps {
                    eprintln!(
                        "step {} {} on {}: {}",
                        s.index,
                        s.op,
                        s.frame,
                        if s.passed { "pass" } else { "FAIL" }
                    );
                }
            }
            for p in written {
                println!("{}", p.display());
            }
            let verdict = if report.summary.passed { "pass" } else { "fail" };
            eprintln!(
                "{verdict}: {} steps in {:.2}s",
                report.summary.steps, report.wall_time_seconds
            );
            if report.summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
