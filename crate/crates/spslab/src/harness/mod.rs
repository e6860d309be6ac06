//! Configuration-driven experiment runner, seed sweeps, verification suites
//! and report summaries.

mod config;
mod runner;
mod verify;

pub use config::{
    parse_config, parse_config_str, ExperimentConfig, MethodKind, OptimizerSpec, OutputSpec,
    ProblemClass, ProblemSpec, RunSpec, ScheduleKind, X0Spec,
};
pub use runner::{
    build_problem, build_state, drive, initial_point, output_dir_override, run_experiment,
    run_grid, GridEntry, GridSummary,
};
pub use verify::{
    distillation_checks, equivalence_checks, lemma_checks, misspecification_checks,
    monotonicity_checks, poisson_checks, rate_checks, run_suite, Suite, DISTILL_SGD_GRID,
    POISSON_SGD_GRID,
};

use std::path::Path;

use crate::record::format_f64;
use crate::{Error, Result};

/// Summarizes every trajectory CSV in a run directory: one line per file
/// with its final full loss and row count.
pub fn summarize_run_dir(dir: &Path) -> Result<String> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Invalid(format!(
            "no trajectory CSVs under {}",
            dir.display()
        )));
    }
    let mut out = String::from("file,rows,final_loss_full,final_cesaro_loss\n");
    for path in files {
        let text = std::fs::read_to_string(&path)?;
        let mut rows = 0usize;
        let mut last_line = None;
        for line in text.lines().skip(1) {
            if !line.is_empty() {
                rows += 1;
                last_line = Some(line);
            }
        }
        let (loss, cesaro) = match last_line {
            Some(line) => {
                let fields: Vec<&str> = line.split(',').collect();
                let parse = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
                (parse(fields[1]), parse(fields[5]))
            }
            None => (f64::NAN, f64::NAN),
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            path.file_name().unwrap().to_string_lossy(),
            rows,
            format_f64(loss),
            format_f64(cesaro)
        ));
    }
    Ok(out)
}
