use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spslab::analysis::{reports_to_csv, reports_to_text};
use spslab::harness::{
    output_dir_override, parse_config, run_experiment, run_grid, run_suite, summarize_run_dir,
    Suite,
};
use spslab::record::format_f64;

#[derive(Parser)]
#[command(name = "spslab", version, about = "Stochastic Polyak step-size laboratory")]
struct Cli {
    /// Worker threads for seed sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config over its seed sweep.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config; `SPSLAB_OUT` wins over both).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed list `a..b` or `s1,s2,...` overriding the config.
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Run every `*.cfg` in a directory and report the best final loss.
    Grid {
        config_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exits nonzero when a check fails.
    Verify {
        /// lemmas|monotonicity|rates|equivalence|distillation|all
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize the trajectory CSVs in a run directory.
    Report { run_dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("spslab: cannot configure thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("spslab: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> spslab::Result<ExitCode> {
    match command {
        Command::Run { config, out, seeds } => {
            let mut config = parse_config(&config)?;
            if let Some(spec) = seeds {
                config.run.seeds = spslab::harness::parse_config_str(&format!(
                    "run.seeds = {spec}\n"
                ))?
                .run
                .seeds;
            }
            if let Some(out) = out {
                config.output.dir = Some(out.to_string_lossy().into_owned());
                config.output.trajectory = true;
            }
            print!("{}", config.emit());
            let records = run_experiment(&config)?;
            for record in &records {
                let status = record
                    .failed
                    .as_deref()
                    .map_or("ok".to_string(), |m| format!("failed: {m}"));
                println!(
                    "seed {}: rows={} final_loss={} [{}]",
                    record.seed,
                    record.rows.len(),
                    format_f64(record.final_loss().unwrap_or(f64::NAN)),
                    status
                );
            }
            for &t in config.run.checkpoints.iter().filter(|&&t| t <= config.run.iters) {
                let complete: Vec<f64> = records
                    .iter()
                    .filter_map(|r| r.rows.get(t).map(|row| row.loss_full))
                    .collect();
                if complete.len() == records.len() {
                    let mean = complete.iter().sum::<f64>() / complete.len() as f64;
                    println!("checkpoint t={t}: mean_loss_full={}", format_f64(mean));
                }
            }
            if records.iter().any(|r| r.failed.is_some()) {
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Grid { config_dir, out } => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&config_dir)?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|ext| ext == "cfg"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(spslab::Error::Invalid(format!(
                    "no .cfg files under {}",
                    config_dir.display()
                )));
            }
            let mut configs = Vec::new();
            for path in paths {
                let label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                configs.push((label, parse_config(&path)?));
            }
            let summary = run_grid(&configs)?;
            print!("{}", summary.to_text());
            if let Some(out) = out {
                std::fs::create_dir_all(&out)?;
                std::fs::write(out.join("grid_summary.csv"), summary.to_text())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, out } => {
            let suite: Suite = suite.parse()?;
            let reports = run_suite(suite);
            print!("{}", reports_to_text(&reports));
            if let Some(out) = out {
                let dir = output_dir_override().map(PathBuf::from).unwrap_or(out);
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("verify_report.txt"), reports_to_text(&reports))?;
                std::fs::write(dir.join("verify_report.csv"), reports_to_csv(&reports))?;
            }
            if reports.iter().all(|r| r.passed) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Report { run_dir } => {
            print!("{}", summarize_run_dir(&run_dir)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
