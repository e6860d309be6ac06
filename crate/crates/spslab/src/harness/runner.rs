//! Experiment runner: builds problems and optimizer states from a resolved
//! configuration, sweeps seeds (in parallel; results are ordered and
//! deterministic), and records trajectories.

use std::path::PathBuf;

use rayon::prelude::*;

use super::config::{
    ExperimentConfig, MethodKind, ProblemClass, ProblemSpec, ScheduleKind, X0Spec,
};
use crate::optim::{IamState, OptimizerState, SgdMomentumState, SgdSchedule, SpsConfig, SpsVariant};
use crate::problems::{
    AbsoluteLossRegression, DistillationTask, PoissonRegression, Problem, QuadraticFiniteSum,
};
use crate::record::{RunRecord, TrajectoryRow};
use crate::rng::{make_rng, sample_batch};
use crate::{ParamVector, Result};

/// Instantiates the configured problem, with its solution computed whenever
/// the class provides one.
pub fn build_problem(spec: &ProblemSpec) -> Result<Box<dyn Problem>> {
    match spec.class {
        ProblemClass::Quadratic => {
            let mut p =
                QuadraticFiniteSum::generate(spec.n, spec.d, spec.interpolated, spec.nu, spec.seed);
            p.solve()?;
            Ok(Box::new(p))
        }
        ProblemClass::AbsLoss => Ok(Box::new(AbsoluteLossRegression::generate(
            spec.n,
            spec.d,
            spec.interpolated,
            spec.noise,
            spec.seed,
        ))),
        ProblemClass::Poisson => {
            let mut p = match &spec.csv {
                Some(path) => PoissonRegression::from_csv(std::path::Path::new(path))?,
                None => PoissonRegression::generate(spec.n, spec.d, spec.seed),
            };
            p.solve()?;
            Ok(Box::new(p))
        }
        ProblemClass::Distillation => Ok(Box::new(DistillationTask::generate(
            spec.n,
            spec.d_teacher,
            spec.d_student,
            spec.noise,
            spec.seed,
        )?)),
    }
}

/// Starting iterate shared by every seed of a sweep, so that the initial
/// distance entering the certificates is a single well-defined constant.
pub fn initial_point(problem: &dyn Problem, spec: &ProblemSpec, x0: X0Spec) -> ParamVector {
    match x0 {
        X0Spec::Zeros => ParamVector::zeros(problem.dim()),
        X0Spec::Gaussian(scale) => {
            let mut rng = make_rng(spec.seed).split("x0");
            rng.normal_vector(problem.dim()) * scale
        }
    }
}

/// Builds the optimizer state for one run.
pub fn build_state(config: &ExperimentConfig, x0: ParamVector) -> OptimizerState {
    let o = &config.optimizer;
    match o.method {
        MethodKind::Sps => OptimizerState::Sps {
            x: x0,
            config: SpsConfig {
                variant: SpsVariant::Star,
                opt_loss: o.opt_loss,
            },
        },
        MethodKind::SpsMax => OptimizerState::Sps {
            x: x0,
            config: SpsConfig {
                variant: SpsVariant::Max { gamma_b: o.gamma_b },
                opt_loss: o.opt_loss,
            },
        },
        MethodKind::SpsDamp => OptimizerState::Sps {
            x: x0,
            config: SpsConfig {
                variant: SpsVariant::Damp { epsilon: o.epsilon },
                opt_loss: o.opt_loss,
            },
        },
        MethodKind::Iam => OptimizerState::Iam(IamState::new(x0, o.lambda, o.opt_loss)),
        MethodKind::IamAdam => OptimizerState::Iam(IamState::with_adam(
            x0,
            o.lambda,
            o.opt_loss,
            o.beta2,
            o.eps_pre,
        )),
        MethodKind::Sgd => OptimizerState::Sgd {
            x: x0,
            schedule: match o.schedule {
                ScheduleKind::Constant => SgdSchedule::Constant(o.lr),
                ScheduleKind::InvSqrt => SgdSchedule::InvSqrt(o.lr),
                ScheduleKind::FiniteHorizon => SgdSchedule::FiniteHorizon {
                    gamma0: o.lr,
                    noise: o.noise_estimate,
                    horizon: config.run.iters,
                },
            },
            t: 0,
        },
        MethodKind::SgdMomentum => {
            let dim = x0.len();
            OptimizerState::SgdMomentum {
                x: x0,
                inner: SgdMomentumState::new(dim),
                gamma: o.lr,
                beta: o.beta,
            }
        }
    }
}

/// Drives one optimizer over `iters` batches. The observer sees the state
/// at every time `t = 0..=iters` before any step leaves it.
pub fn drive(
    problem: &dyn Problem,
    state: &mut OptimizerState,
    sampler_seed: u64,
    iters: usize,
    batch_size: usize,
    mut observe: impl FnMut(usize, &OptimizerState),
) -> Result<()> {
    let mut rng = make_rng(sampler_seed).split("sampler");
    let n = problem.n_components();
    for t in 0..iters {
        observe(t, state);
        let batch = sample_batch(&mut rng, n, batch_size)?;
        state.step(problem, &batch).map_err(|e| e.at_iteration(t))?;
    }
    observe(iters, state);
    Ok(())
}

fn run_single(problem: &dyn Problem, config: &ExperimentConfig, seed: u64) -> RunRecord {
    let mut record = RunRecord::new(seed, config.digest());
    let x0 = initial_point(problem, &config.problem, config.run.x0);
    let mut state = build_state(config, x0.clone());
    let mut rng = make_rng(seed).split("sampler");
    let n = problem.n_components();
    let solution = problem.solution().map(|(x, _)| x.clone());
    let mut cesaro_sum = ParamVector::zeros(problem.dim());

    for t in 0..=config.run.iters {
        let x = state.x().clone();
        let loss_full = problem.full_loss(&x);
        let cesaro_loss = if t == 0 {
            loss_full
        } else {
            problem.full_loss(&(&cesaro_sum / t as f64))
        };
        let dist_to_opt = solution
            .as_ref()
            .map_or(f64::NAN, |x_star| (&x - x_star).norm());
        let mut row = TrajectoryRow {
            t,
            loss_full,
            loss_batch: f64::NAN,
            stepsize: f64::NAN,
            dist_to_opt,
            cesaro_loss,
        };
        cesaro_sum += &x;
        if t == config.run.iters {
            record.rows.push(row);
            break;
        }
        let step_result = (|| -> Result<()> {
            let batch = sample_batch(&mut rng, n, config.run.batch_size)?;
            let (loss_batch, _) = problem.eval(&batch, &x)?;
            row.loss_batch = loss_batch;
            row.stepsize = state.step(problem, &batch)?;
            Ok(())
        })();
        record.rows.push(row);
        if let Err(e) = step_result {
            record.failed = Some(e.at_iteration(t).to_string());
            break;
        }
    }
    record
}

/// Runs the configured seed sweep; one record per seed, ordered by seed.
/// A diverged seed is marked failed and does not abort the others. When the
/// config requests trajectories they are written as
/// `<dir>/trajectory_seed<k>.csv`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let problem = build_problem(&config.problem)?;
    let mut records: Vec<RunRecord> = config
        .run
        .seeds
        .par_iter()
        .map(|&seed| run_single(problem.as_ref(), config, seed))
        .collect();
    records.sort_by_key(|r| r.seed);
    if let (Some(dir), true) = (&config.output.dir, config.output.trajectory) {
        let dir = output_dir_override().unwrap_or_else(|| dir.clone());
        for record in &records {
            let path = PathBuf::from(&dir).join(format!("trajectory_seed{}.csv", record.seed));
            record.write_csv(&path)?;
        }
    }
    Ok(records)
}

/// The `SPSLAB_OUT` environment variable overrides the configured output
/// directory (and nothing else).
pub fn output_dir_override() -> Option<String> {
    std::env::var("SPSLAB_OUT").ok().filter(|s| !s.is_empty())
}

#[derive(Debug, Clone)]
pub struct GridEntry {
    pub label: String,
    /// Seed-mean full loss at the last iterate; NaN when every seed failed.
    pub final_loss: f64,
    pub failed: bool,
}

#[derive(Debug, Clone)]
pub struct GridSummary {
    pub entries: Vec<GridEntry>,
    /// Index of the best non-failed entry.
    pub best: Option<usize>,
}

impl GridSummary {
    pub fn to_text(&self) -> String {
        let mut out = String::from("label,final_loss,status\n");
        for (i, e) in self.entries.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}{}\n",
                e.label,
                crate::record::format_f64(e.final_loss),
                if e.failed { "diverged" } else { "ok" },
                if self.best == Some(i) { ",best" } else { "" }
            ));
        }
        out
    }
}

/// Runs each config and reports the seed-mean final loss of the last
/// iterate; diverged configs are marked and excluded from `best`.
pub fn run_grid(configs: &[(String, ExperimentConfig)]) -> Result<GridSummary> {
    let mut entries = Vec::with_capacity(configs.len());
    for (label, config) in configs {
        let records = run_experiment(config)?;
        let failed = records.iter().any(|r| r.failed.is_some());
        let final_loss = if failed {
            f64::NAN
        } else {
            records
                .iter()
                .filter_map(|r| r.final_loss())
                .sum::<f64>()
                / records.len() as f64
        };
        entries.push(GridEntry {
            label: label.clone(),
            final_loss: if final_loss.is_finite() {
                final_loss
            } else {
                f64::NAN
            },
            failed: failed || !final_loss.is_finite(),
        });
    }
    let best = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.failed)
        .min_by(|(_, a), (_, b)| a.final_loss.total_cmp(&b.final_loss))
        .map(|(i, _)| i);
    Ok(GridSummary { entries, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config_str;

    fn tiny_config() -> ExperimentConfig {
        let text = "\
problem.class = quadratic
problem.n = 10
problem.d = 4
problem.seed = 2
optimizer.method = iam
run.iters = 50
run.batch_size = 2
run.seeds = 0..4
";
        parse_config_str(text).unwrap()
    }

    #[test]
    fn zero_iteration_run_records_initial_row_only() {
        let mut config = tiny_config();
        config.run.iters = 0;
        config.run.seeds = vec![0];
        let records = run_experiment(&config).unwrap();
        assert_eq!(records[0].rows.len(), 1);
        let row = &records[0].rows[0];
        assert_eq!(row.t, 0);
        assert!(row.stepsize.is_nan());
        assert!(row.loss_full.is_finite());
        assert_eq!(row.cesaro_loss, row.loss_full);
    }

    #[test]
    fn reruns_are_bit_identical() {
        let config = tiny_config();
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a.len(), b.len());
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.to_csv(), rb.to_csv());
        }
    }

    #[test]
    fn serial_pool_matches_parallel() {
        let config = tiny_config();
        let parallel = run_experiment(&config).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = pool.install(|| run_experiment(&config).unwrap());
        for (a, b) in parallel.iter().zip(&serial) {
            assert_eq!(a.to_csv(), b.to_csv());
        }
    }

    #[test]
    fn cesaro_column_matches_brute_force_average() {
        let config = tiny_config();
        let records = run_experiment(&config).unwrap();
        let record = &records[0];
        // Replay the same run, collecting iterates directly.
        let problem = build_problem(&config.problem).unwrap();
        let x0 = initial_point(problem.as_ref(), &config.problem, config.run.x0);
        let mut state = build_state(&config, x0);
        let mut iterates = Vec::new();
        drive(problem.as_ref(), &mut state, 0, config.run.iters, 2, |_, s| {
            iterates.push(s.x().clone());
        })
        .unwrap();
        let mut rng = make_rng(9);
        for _ in 0..10 {
            let t = 1 + rng.index(config.run.iters);
            // Sum in reverse order so the oracle is a different computation.
            let mut sum = ParamVector::zeros(4);
            for x in iterates[..t].iter().rev() {
                sum += x;
            }
            let direct = problem.full_loss(&(sum / t as f64));
            let recorded = record.rows[t].cesaro_loss;
            assert!(
                (direct - recorded).abs() <= 1e-12 * (1.0 + direct.abs()),
                "t = {t}: {direct} vs {recorded}"
            );
        }
    }

    #[test]
    fn diverged_run_is_marked_and_grid_excludes_it() {
        // A huge constant step on the Poisson objective overflows exp().
        let text = "\
problem.class = poisson
problem.n = 40
problem.d = 4
problem.seed = 3
optimizer.method = sgd
optimizer.lr = 1e6
run.iters = 200
run.seeds = 0..2
";
        let bad = parse_config_str(text).unwrap();
        let records = run_experiment(&bad).unwrap();
        assert!(records.iter().all(|r| r.failed.is_some()));
        let mut good = bad.clone();
        good.optimizer.lr = 1e-3;
        let summary = run_grid(&[
            ("lr=1e6".into(), bad),
            ("lr=1e-3".into(), good),
        ])
        .unwrap();
        assert!(summary.entries[0].failed);
        assert!(!summary.entries[1].failed);
        assert_eq!(summary.best, Some(1));
    }

    #[test]
    fn singleton_grid_returns_that_run() {
        let config = tiny_config();
        let summary = run_grid(&[("only".into(), config)]).unwrap();
        assert_eq!(summary.entries.len(), 1);
        assert_eq!(summary.best, Some(0));
    }
}
