//! Named verification suites. Every check runs on fixed instances and fixed
//! seeds, so repeated invocations produce byte-identical reports.

use rayon::prelude::*;

use super::runner::drive;
use crate::analysis::{
    adagrad_oracle, certificate, check_monotone, check_rate, perspective_convexity_probe, psi,
    psi_inv, titu_oracle, CertificateKind, CheckReport, CheckRow,
};
use crate::optim::{
    momentum_params_from_iam, HeavyBallState, IamState, LambdaSchedule, MomentumParams,
    OptimizerState, SgdMomentumState, SgdSchedule, SpsConfig,
};
use crate::problems::{
    AbsoluteLossRegression, DistillationTask, OptLossMode, PoissonRegression, Problem,
    QuadraticFiniteSum,
};
use crate::rng::{make_rng, sample_batch, BatchSample};
use crate::{Error, ParamVector, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemmas,
    Monotonicity,
    Rates,
    Equivalence,
    Distillation,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "monotonicity" => Ok(Suite::Monotonicity),
            "rates" => Ok(Suite::Rates),
            "equivalence" => Ok(Suite::Equivalence),
            "distillation" => Ok(Suite::Distillation),
            "all" => Ok(Suite::All),
            _ => Err(Error::Invalid(format!(
                "unknown suite `{s}`; expected lemmas|monotonicity|rates|equivalence|distillation|all"
            ))),
        }
    }
}

/// Runs the named suite. `all` additionally covers the misspecification and
/// Poisson-grid experiment reproductions, which have no named suite of
/// their own.
pub fn run_suite(suite: Suite) -> Vec<CheckReport> {
    let result = match suite {
        Suite::Lemmas => lemma_checks(),
        Suite::Monotonicity => monotonicity_checks(),
        Suite::Rates => rate_checks(),
        Suite::Equivalence => equivalence_checks(),
        Suite::Distillation => distillation_checks(),
        Suite::All => {
            let mut all = Vec::new();
            for part in [
                lemma_checks(),
                monotonicity_checks(),
                rate_checks(),
                equivalence_checks(),
                misspecification_checks(),
                poisson_checks(),
                distillation_checks(),
            ] {
                match part {
                    Ok(mut reports) => all.append(&mut reports),
                    Err(e) => all.push(error_report(e)),
                }
            }
            return all;
        }
    };
    match result {
        Ok(reports) => reports,
        Err(e) => vec![error_report(e)],
    }
}

fn error_report(e: Error) -> CheckReport {
    CheckReport::new(
        "suite error",
        vec![CheckRow {
            label: "error".into(),
            empirical: f64::NAN,
            reference: f64::NAN,
            ratio: f64::INFINITY,
            note: e.to_string(),
        }],
    )
}

fn pass_fail_row(label: &str, violations: usize, total: usize) -> CheckRow {
    CheckRow {
        label: label.into(),
        empirical: violations as f64,
        reference: 0.0,
        ratio: if violations == 0 { 0.0 } else { f64::INFINITY },
        note: format!("{total} random instances"),
    }
}

// ---------------------------------------------------------------------------
// Shared fixtures
// ---------------------------------------------------------------------------

const RATE_SEEDS: u64 = 20;
const EXP_SEEDS: u64 = 10;
const SLACK: f64 = 0.1;

fn gaussian_x0(problem_seed: u64, dim: usize) -> ParamVector {
    make_rng(problem_seed).split("x0").normal_vector(dim)
}

fn quad_interpolated() -> Result<(QuadraticFiniteSum, ParamVector)> {
    let mut p = QuadraticFiniteSum::generate(50, 10, true, 0.1, 1);
    p.solve()?;
    let x0 = gaussian_x0(1, 10);
    Ok((p, x0))
}

fn quad_noninterpolated() -> Result<(QuadraticFiniteSum, ParamVector)> {
    let mut p = QuadraticFiniteSum::generate(50, 10, false, 0.1, 1);
    p.solve()?;
    let x0 = gaussian_x0(1, 10);
    Ok((p, x0))
}

fn absloss_interpolated() -> (AbsoluteLossRegression, ParamVector) {
    let p = AbsoluteLossRegression::generate(50, 10, true, 0.0, 2);
    let x0 = gaussian_x0(2, 10);
    (p, x0)
}

type StateBuilder<'a> = &'a (dyn Fn(ParamVector) -> OptimizerState + Sync);

fn sps_theoretical(x: ParamVector) -> OptimizerState {
    OptimizerState::Sps {
        x,
        config: SpsConfig::star(OptLossMode::Theoretical),
    }
}

fn iam_builder(lambda: LambdaSchedule, mode: OptLossMode) -> impl Fn(ParamVector) -> OptimizerState + Sync {
    move |x| OptimizerState::Iam(IamState::new(x, lambda, mode))
}

// ---------------------------------------------------------------------------
// Trajectory statistics
// ---------------------------------------------------------------------------

/// Seed-averaged gaps and distances at the given checkpoints.
struct TrajectoryStats {
    t: Vec<f64>,
    /// Full-loss gap of the running iterate average.
    cesaro_gap: Vec<f64>,
    /// Full-loss gap of the iterate at the checkpoint.
    last_gap: Vec<f64>,
    /// Full-loss gap of the iterate one step before the checkpoint.
    prev_gap: Vec<f64>,
    /// Squared distance of the iterate to the solution.
    dist_sq: Vec<f64>,
}

impl TrajectoryStats {
    fn series(&self, values: &[f64]) -> Vec<(f64, f64)> {
        self.t.iter().copied().zip(values.iter().copied()).collect()
    }

    fn cesaro(&self) -> Vec<(f64, f64)> {
        self.series(&self.cesaro_gap)
    }

    fn last(&self) -> Vec<(f64, f64)> {
        self.series(&self.last_gap)
    }

    fn prev(&self) -> Vec<(f64, f64)> {
        self.series(&self.prev_gap)
    }

    fn dist(&self) -> Vec<(f64, f64)> {
        self.series(&self.dist_sq)
    }
}

fn seed_mean_stats(
    problem: &dyn Problem,
    x0: &ParamVector,
    build: StateBuilder,
    seeds: u64,
    iters: usize,
    batch_size: usize,
    checkpoints: &[usize],
) -> Result<TrajectoryStats> {
    let (x_star, f_star) = problem
        .solution()
        .ok_or(Error::Config("trajectory statistics need a solved problem".into()))?;
    let x_star = x_star.clone();
    let per_seed: Vec<Result<Vec<[f64; 4]>>> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let mut state = build(x0.clone());
            let mut sum = ParamVector::zeros(problem.dim());
            let mut prev_x = x0.clone();
            let mut cursor = 0usize;
            let mut rows = Vec::with_capacity(checkpoints.len());
            drive(problem, &mut state, seed, iters, batch_size, |t, s| {
                let x = s.x();
                if cursor < checkpoints.len() && checkpoints[cursor] == t {
                    let cesaro = if t == 0 {
                        problem.full_loss(x)
                    } else {
                        problem.full_loss(&(&sum / t as f64))
                    };
                    let prev = if t == 0 {
                        f64::NAN
                    } else {
                        problem.full_loss(&prev_x)
                    };
                    rows.push([
                        cesaro - f_star,
                        problem.full_loss(x) - f_star,
                        prev - f_star,
                        (x - &x_star).norm_squared(),
                    ]);
                    cursor += 1;
                }
                sum += x;
                prev_x.copy_from(x);
            })?;
            Ok(rows)
        })
        .collect();
    let mut acc = vec![[0.0f64; 4]; checkpoints.len()];
    for rows in per_seed {
        let rows = rows?;
        for (a, r) in acc.iter_mut().zip(&rows) {
            for k in 0..4 {
                a[k] += r[k];
            }
        }
    }
    let inv = 1.0 / seeds as f64;
    Ok(TrajectoryStats {
        t: checkpoints.iter().map(|&c| c as f64).collect(),
        cesaro_gap: acc.iter().map(|a| a[0] * inv).collect(),
        last_gap: acc.iter().map(|a| a[1] * inv).collect(),
        prev_gap: acc.iter().map(|a| a[2] * inv).collect(),
        dist_sq: acc.iter().map(|a| a[3] * inv).collect(),
    })
}

/// Seed-mean full loss at the last iterate, or `None` when a seed diverged.
fn mean_final_loss(
    problem: &dyn Problem,
    x0: &ParamVector,
    build: StateBuilder,
    seeds: u64,
    iters: usize,
    batch_size: usize,
) -> Result<Option<f64>> {
    let finals: Vec<Result<Option<f64>>> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let mut state = build(x0.clone());
            match drive(problem, &mut state, seed, iters, batch_size, |_, _| {}) {
                Ok(()) => Ok(Some(problem.full_loss(state.x()))),
                Err(Error::NonFinite { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut sum = 0.0;
    for f in finals {
        match f? {
            Some(v) => sum += v,
            None => return Ok(None),
        }
    }
    Ok(Some(sum / seeds as f64))
}

// ---------------------------------------------------------------------------
// Suite: lemmas
// ---------------------------------------------------------------------------

pub fn lemma_checks() -> Result<Vec<CheckReport>> {
    const TRIALS: usize = 10_000;
    let mut reports = Vec::new();

    // Round trip of the rate reciprocal map.
    let mut rng = make_rng(100);
    let mut worst = 0.0f64;
    for _ in 0..TRIALS {
        let a = rng.uniform_range(0.0, 10.0);
        let b = rng.uniform_range(0.0, 10.0);
        if a + b <= 1e-9 {
            continue;
        }
        let s = rng.uniform_range(0.0, 10.0);
        let back = psi(psi_inv(s, a, b), a, b);
        worst = worst.max((back - s).abs() / (1.0 + s.abs()));
    }
    reports.push(CheckReport::new(
        "lemma psi_roundtrip",
        vec![CheckRow {
            label: "worst relative error".into(),
            empirical: worst,
            reference: 1e-10,
            ratio: worst / 1e-10,
            note: format!("{TRIALS} random (A,B,s)"),
        }],
    ));

    // Positive-part sum inequality.
    let mut rng = make_rng(101);
    let mut violations = 0usize;
    for _ in 0..TRIALS {
        let len = 1 + rng.index(16);
        let a: Vec<f64> = (0..len).map(|_| rng.uniform_range(-5.0, 5.0)).collect();
        let b: Vec<f64> = (0..len).map(|_| rng.uniform_range(1e-2, 5.0)).collect();
        if !titu_oracle(&a, &b) {
            violations += 1;
        }
    }
    reports.push(CheckReport::new(
        "lemma titu_sum",
        vec![pass_fail_row("violations", violations, TRIALS)],
    ));

    // Partial-sum square-root inequality.
    let mut rng = make_rng(102);
    let mut violations = 0usize;
    for _ in 0..TRIALS {
        let len = 1 + rng.index(16);
        let mut c: Vec<f64> = (0..len).map(|_| rng.uniform_range(0.0, 5.0)).collect();
        c[0] = rng.uniform_range(1e-2, 5.0);
        if !adagrad_oracle(&c) {
            violations += 1;
        }
    }
    reports.push(CheckReport::new(
        "lemma adagrad_partial_sums",
        vec![pass_fail_row("violations", violations, TRIALS)],
    ));

    // Midpoint convexity of the positive-part ratio.
    let mut rng = make_rng(103);
    let ok = perspective_convexity_probe(&mut rng, TRIALS);
    reports.push(CheckReport::new(
        "lemma perspective_convexity",
        vec![pass_fail_row("violations", usize::from(!ok), TRIALS)],
    ));

    Ok(reports)
}

// ---------------------------------------------------------------------------
// Suite: monotonicity
// ---------------------------------------------------------------------------

struct MonotoneOutcome {
    monotone_rows: Vec<CheckRow>,
    bounded_rows: Vec<CheckRow>,
}

fn monotone_sweep(
    problem: &dyn Problem,
    x0: &ParamVector,
    build: StateBuilder,
    seeds: u64,
    iters: usize,
    batch_size: usize,
    rel_tol: f64,
) -> Result<MonotoneOutcome> {
    let (x_star, _) = problem
        .solution()
        .ok_or(Error::Config("monotonicity checks need a solved problem".into()))?;
    let x_star = x_star.clone();
    let d_init = (x0 - &x_star).norm();
    let per_seed: Vec<Result<(CheckRow, CheckRow)>> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let mut state = build(x0.clone());
            let mut series = Vec::with_capacity(iters + 1);
            let mut max_x_dist = 0.0f64;
            drive(problem, &mut state, seed, iters, batch_size, |_, s| {
                series.push((s.monotone_point() - &x_star).norm());
                max_x_dist = max_x_dist.max((s.x() - &x_star).norm());
            })?;
            let report = check_monotone("seed", &series, rel_tol);
            let mut row = report.rows[0].clone();
            row.label = format!("seed {seed} {}", row.label);
            let allowed = d_init + 1e-9;
            let bound_row = CheckRow {
                label: format!("seed {seed} max iterate distance"),
                empirical: max_x_dist,
                reference: allowed,
                ratio: max_x_dist / allowed,
                note: String::new(),
            };
            Ok((row, bound_row))
        })
        .collect();
    let mut outcome = MonotoneOutcome {
        monotone_rows: Vec::new(),
        bounded_rows: Vec::new(),
    };
    for r in per_seed {
        let (m, b) = r?;
        outcome.monotone_rows.push(m);
        outcome.bounded_rows.push(b);
    }
    Ok(outcome)
}

pub fn monotonicity_checks() -> Result<Vec<CheckReport>> {
    let iters = 10_000;
    let rel_tol = 1e-9;
    let (quad_i, x0_qi) = quad_interpolated()?;
    let (quad_n, x0_qn) = quad_noninterpolated()?;
    let (absl, x0_a) = absloss_interpolated();
    let problems: [(&str, &dyn Problem, &ParamVector); 3] = [
        ("quad_interp", &quad_i, &x0_qi),
        ("quad_noninterp", &quad_n, &x0_qn),
        ("absloss", &absl, &x0_a),
    ];
    let iam_t = iam_builder(LambdaSchedule::Linear, OptLossMode::Theoretical);
    let iam_9 = iam_builder(LambdaSchedule::Constant(9.0), OptLossMode::Theoretical);
    let methods: [(&str, StateBuilder, bool); 3] = [
        ("sps", &sps_theoretical, false),
        ("iam_lambda_t", &iam_t, true),
        ("iam_lambda_9", &iam_9, true),
    ];
    let mut reports = Vec::new();
    for (pname, problem, x0) in problems {
        for (mname, build, is_iam) in methods {
            let outcome =
                monotone_sweep(problem, x0, build, RATE_SEEDS, iters, 1, rel_tol)?;
            reports.push(CheckReport::new(
                format!("monotone {mname} {pname}"),
                outcome.monotone_rows,
            ));
            if is_iam {
                reports.push(CheckReport::new(
                    format!("bounded {mname} {pname}"),
                    outcome.bounded_rows,
                ));
            }
        }
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Suite: rates
// ---------------------------------------------------------------------------

/// Least-squares slope of `ln(gap)` against `ln(t)`.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let valid: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, g)| *g > 0.0)
        .map(|&(t, g)| (t.ln(), g.ln()))
        .collect();
    if valid.len() < 2 {
        return f64::NAN;
    }
    let n = valid.len() as f64;
    let mean_x = valid.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = valid.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in valid {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    num / den
}

pub fn rate_checks() -> Result<Vec<CheckReport>> {
    let iters = 10_000;
    let checkpoints = [10usize, 100, 1_000, 10_000];
    let mut reports = Vec::new();

    // Non-smooth rates on interpolated absolute loss.
    let (absl, x0_a) = absloss_interpolated();
    let consts_a = absl.constants(&x0_a);
    let sps_abs = seed_mean_stats(
        &absl,
        &x0_a,
        &sps_theoretical,
        RATE_SEEDS,
        iters,
        1,
        &checkpoints,
    )?;
    reports.push(check_rate(
        "rate nonsmooth_avg sps absloss",
        &sps_abs.cesaro(),
        &certificate(CertificateKind::NonsmoothAvg, &consts_a)?,
        SLACK,
    ));
    let iam_t = iam_builder(LambdaSchedule::Linear, OptLossMode::Theoretical);
    let iam_abs = seed_mean_stats(&absl, &x0_a, &iam_t, RATE_SEEDS, iters, 1, &checkpoints)?;
    reports.push(check_rate(
        "rate nonsmooth_last iam absloss",
        &iam_abs.last(),
        &certificate(CertificateKind::IamNonsmoothLast, &consts_a)?,
        SLACK,
    ));

    // Smooth and strongly convex rates on the non-interpolated quadratic.
    let (quad_n, x0_q) = quad_noninterpolated()?;
    let consts_q = quad_n.constants(&x0_q);
    consts_q.validate()?;
    let sps_quad = seed_mean_stats(
        &quad_n,
        &x0_q,
        &sps_theoretical,
        RATE_SEEDS,
        iters,
        1,
        &checkpoints,
    )?;
    reports.push(check_rate(
        "rate smooth_avg sps quad",
        &sps_quad.cesaro(),
        &certificate(CertificateKind::SmoothAvg, &consts_q)?,
        SLACK,
    ));
    reports.push(check_rate(
        "rate smooth_avg_sigma sps quad",
        &sps_quad.cesaro(),
        &certificate(CertificateKind::SmoothAvgSigma, &consts_q)?,
        SLACK,
    ));
    reports.push(check_rate(
        "rate strong_convex_dist sps quad",
        &sps_quad.dist(),
        &certificate(CertificateKind::StrongConvexDist, &consts_q)?,
        SLACK,
    ));
    let iam_quad = seed_mean_stats(&quad_n, &x0_q, &iam_t, RATE_SEEDS, iters, 1, &checkpoints)?;
    reports.push(check_rate(
        "rate smooth_last iam quad",
        &iam_quad.prev(),
        &certificate(CertificateKind::IamSmoothLast, &consts_q)?,
        SLACK,
    ));

    // Interpolation accelerates the averaged iterate to (at least) 1/T.
    let (quad_i, x0_i) = quad_interpolated()?;
    let slope_grid = [100usize, 316, 1_000, 3_162, 10_000];
    let sps_interp = seed_mean_stats(
        &quad_i,
        &x0_i,
        &sps_theoretical,
        RATE_SEEDS,
        iters,
        1,
        &slope_grid,
    )?;
    let slope = log_log_slope(&sps_interp.cesaro());
    let ratio = if slope < 0.0 { -0.9 / slope } else { f64::INFINITY };
    reports.push(CheckReport::new(
        "rate interp_slope sps quad",
        vec![CheckRow {
            label: "log-log slope".into(),
            empirical: slope,
            reference: -0.9,
            ratio,
            note: "averaged-iterate gap over T in [1e2, 1e4]".into(),
        }],
    ));

    Ok(reports)
}

// ---------------------------------------------------------------------------
// Suite: equivalence
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum SampleStream {
    /// Every step sees the full sum; the expected-descent numerator stays
    /// positive, so no step stalls.
    FullBatch,
    Stochastic(usize),
}

fn equivalence_report(
    name: &str,
    lambda: LambdaSchedule,
    interpolated: bool,
    problem_seed: u64,
    stream: SampleStream,
) -> Result<CheckReport> {
    const STEPS: usize = 100;
    let n = 20;
    let mut problem = QuadraticFiniteSum::generate(n, 8, interpolated, 0.1, problem_seed);
    problem.solve()?;
    let x0 = gaussian_x0(problem_seed, 8);

    let mut iam = IamState::new(x0.clone(), lambda, OptLossMode::Theoretical);
    let mut rng = make_rng(0).split("sampler");
    let mut batches = Vec::with_capacity(STEPS);
    let mut etas = Vec::with_capacity(STEPS);
    let mut xs = vec![x0.clone()];
    for _ in 0..STEPS {
        let batch = match stream {
            SampleStream::FullBatch => BatchSample {
                indices: (0..n).collect(),
            },
            SampleStream::Stochastic(size) => sample_batch(&mut rng, n, size)?,
        };
        let eta = iam.step(&problem, &batch)?;
        batches.push(batch);
        etas.push(eta);
        xs.push(iam.x.clone());
    }

    let mut hb = HeavyBallState::new(x0);
    let mut worst = 0.0f64;
    let mut skipped = 0usize;
    for t in 0..STEPS {
        if etas[t] == 0.0 {
            // The parameter mapping divides by eta, and a stalled move has
            // no heavy-ball counterpart, so the correspondence ends here.
            skipped = STEPS - t;
            break;
        }
        let (_, grad) = problem.eval(&batches[t], &hb.x)?;
        let params = if t == 0 {
            MomentumParams {
                beta: 0.0,
                gamma: etas[0] / (1.0 + lambda.value(1)),
                beta_defined: true,
            }
        } else {
            momentum_params_from_iam(lambda.value(t), lambda.value(t + 1), etas[t - 1], etas[t])
        };
        hb.step(&grad, params.beta, params.gamma);
        let rel = (&hb.x - &xs[t + 1]).norm() / (1.0 + xs[t + 1].norm());
        worst = worst.max(rel);
    }
    Ok(CheckReport::new(
        name,
        vec![CheckRow {
            label: "worst relative deviation".into(),
            empirical: worst,
            reference: 1e-10,
            ratio: worst / 1e-10,
            note: format!("{STEPS} steps, {skipped} skipped after a stalled step"),
        }],
    ))
}

pub fn equivalence_checks() -> Result<Vec<CheckReport>> {
    Ok(vec![
        equivalence_report(
            "equivalence heavy_ball lambda_t",
            LambdaSchedule::Linear,
            false,
            6,
            SampleStream::FullBatch,
        )?,
        equivalence_report(
            "equivalence heavy_ball lambda_9",
            LambdaSchedule::Constant(9.0),
            false,
            6,
            SampleStream::FullBatch,
        )?,
        // An instance where the stochastic stream happens to never stall.
        equivalence_report(
            "equivalence heavy_ball lambda_9 stochastic",
            LambdaSchedule::Constant(9.0),
            true,
            10,
            SampleStream::Stochastic(4),
        )?,
    ])
}

// ---------------------------------------------------------------------------
// Suite (under `all`): misspecification of the optimal batch loss
// ---------------------------------------------------------------------------

pub fn misspecification_checks() -> Result<Vec<CheckReport>> {
    let iters = 3_000;
    let batch = 4;
    let checkpoints = [10usize, 100, 1_000, 3_000];
    let mut reports = Vec::new();

    let (quad_i, x0_i) = quad_interpolated()?;
    let (_, f_star_i) = quad_i.solution().expect("solved");
    let iam_9 = |mode: OptLossMode| iam_builder(LambdaSchedule::Constant(9.0), mode);

    let theo_i = seed_mean_stats(
        &quad_i,
        &x0_i,
        &iam_9(OptLossMode::Theoretical),
        RATE_SEEDS,
        iters,
        batch,
        &checkpoints,
    )?;
    let lr = 1.0 / (4.0 * quad_i.l_max());
    let sgdm_builder = move |x: ParamVector| {
        let dim = x.len();
        OptimizerState::SgdMomentum {
            x,
            inner: SgdMomentumState::new(dim),
            gamma: lr,
            beta: 0.9,
        }
    };
    let sgdm_i = seed_mean_stats(
        &quad_i,
        &x0_i,
        &sgdm_builder,
        RATE_SEEDS,
        iters,
        batch,
        &checkpoints,
    )?;

    // Adaptive step with the exact batch optimum keeps up with the tuned
    // theoretical step size.
    let iam_final = theo_i.last_gap.last().unwrap() + f_star_i;
    let sgdm_final = sgdm_i.last_gap.last().unwrap() + f_star_i;
    reports.push(CheckReport::new(
        "misspec iam_theoretical_vs_sgdm",
        vec![CheckRow {
            label: "final full loss".into(),
            empirical: iam_final,
            reference: 1.05 * sgdm_final,
            ratio: iam_final / (1.05 * sgdm_final),
            note: "interpolated quadratic, 3000 steps, batch 4".into(),
        }],
    ));
    reports.push(CheckReport::new(
        "misspec iam_theoretical_converges",
        vec![CheckRow {
            label: "final gap".into(),
            empirical: *theo_i.last_gap.last().unwrap(),
            reference: 1e-6,
            ratio: theo_i.last_gap.last().unwrap() / 1e-6,
            note: "interpolated quadratic".into(),
        }],
    ));
    let sgdm_gaps: Vec<f64> = sgdm_i.last_gap.clone();
    reports.push(check_monotone(
        "misspec sgdm_mean_gap_monotone",
        &sgdm_gaps,
        1e-3,
    ));

    // Misspecified optima stall on the non-interpolated instance.
    let (quad_n, x0_n) = quad_noninterpolated()?;
    let final_cks = [iters];
    let gap = |mode: OptLossMode| -> Result<f64> {
        let stats = seed_mean_stats(
            &quad_n,
            &x0_n,
            &iam_9(mode),
            RATE_SEEDS,
            iters,
            batch,
            &final_cks,
        )?;
        Ok(stats.last_gap[0])
    };
    // A fully converged run can land a few ulps below the optimum.
    let gap_theo = gap(OptLossMode::Theoretical)?.max(0.0);
    let gap_avg = gap(OptLossMode::Averaged)?.max(0.0);
    let gap_zero = gap(OptLossMode::Zero)?.max(0.0);
    reports.push(CheckReport::new(
        "misspec zero_stalls_10x",
        vec![CheckRow {
            label: "final gap ratio".into(),
            empirical: gap_zero,
            reference: 10.0 * gap_theo,
            ratio: 10.0 * gap_theo / gap_zero,
            note: "zero mode must stall at least 10x above theoretical".into(),
        }],
    ));
    reports.push(CheckReport::new(
        "misspec averaged_between",
        vec![
            CheckRow {
                label: "theoretical <= averaged".into(),
                empirical: gap_theo,
                reference: gap_avg,
                ratio: gap_theo / gap_avg,
                note: String::new(),
            },
            CheckRow {
                label: "averaged <= zero".into(),
                empirical: gap_avg,
                reference: gap_zero,
                ratio: gap_avg / gap_zero,
                note: String::new(),
            },
        ],
    ));
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Suite (under `all`): Poisson regression against a tuned SGD grid
// ---------------------------------------------------------------------------

pub const POISSON_SGD_GRID: [f64; 8] = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 50.0];

pub fn poisson_checks() -> Result<Vec<CheckReport>> {
    let n = 512;
    let batch = 16;
    let epochs = 7;
    let iters = epochs * (n / batch);
    let mut problem = PoissonRegression::generate(n, 10, 3);
    problem.solve()?;
    let x0 = ParamVector::zeros(10);

    let mut grid_rows = Vec::new();
    let mut best: Option<f64> = None;
    for multiplier in POISSON_SGD_GRID {
        let lr = 0.001 * multiplier;
        let builder = move |x: ParamVector| OptimizerState::Sgd {
            x,
            schedule: SgdSchedule::Constant(lr),
            t: 0,
        };
        let outcome = mean_final_loss(&problem, &x0, &builder, EXP_SEEDS, iters, batch)?;
        match outcome {
            Some(loss) => {
                best = Some(best.map_or(loss, |b: f64| b.min(loss)));
                grid_rows.push(CheckRow {
                    label: format!("sgd lr={lr}"),
                    empirical: loss,
                    reference: f64::NAN,
                    ratio: 0.0,
                    note: String::new(),
                });
            }
            None => grid_rows.push(CheckRow {
                label: format!("sgd lr={lr}"),
                empirical: f64::NAN,
                reference: f64::NAN,
                ratio: 0.0,
                note: "diverged, excluded".into(),
            }),
        }
    }
    let best = best.ok_or(Error::Config("every grid point diverged".into()))?;

    let iam = iam_builder(LambdaSchedule::Constant(9.0), OptLossMode::Theoretical);
    let iam_loss = mean_final_loss(&problem, &x0, &iam, EXP_SEEDS, iters, batch)?
        .ok_or(Error::Config("adaptive run diverged".into()))?;

    Ok(vec![
        CheckReport::new("poisson sgd_grid", grid_rows),
        CheckReport::new(
            "poisson iam_vs_best_sgd",
            vec![CheckRow {
                label: "final full loss".into(),
                empirical: iam_loss,
                reference: 1.05 * best,
                ratio: iam_loss / (1.05 * best),
                note: format!("{epochs} epochs, batch {batch}, untuned adaptive step"),
            }],
        ),
    ])
}

// ---------------------------------------------------------------------------
// Suite: distillation
// ---------------------------------------------------------------------------

pub const DISTILL_SGD_GRID: [f64; 6] = [1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2];

pub fn distillation_checks() -> Result<Vec<CheckReport>> {
    let n = 512;
    let batch = 8;
    let iters = n / batch; // one pass over the data
    let task = DistillationTask::generate(n, 12, 10, 0.5, 4)?;
    let x0 = ParamVector::zeros(10);
    let student_opt = task.student_optimum_loss();
    let teacher = task.teacher_full_loss();
    let mut reports = Vec::new();

    reports.push(CheckReport::new(
        "distill teacher_below_student_optimum",
        vec![CheckRow {
            label: "teacher full loss".into(),
            empirical: teacher,
            reference: student_opt + 1e-10,
            ratio: teacher / (student_opt + 1e-10),
            note: "teacher is strictly more expressive".into(),
        }],
    ));

    let iam = iam_builder(LambdaSchedule::Constant(9.0), OptLossMode::Teacher);
    let iam_loss = mean_final_loss(&task, &x0, &iam, EXP_SEEDS, iters, batch)?
        .ok_or(Error::Config("distillation run diverged".into()))?;
    reports.push(CheckReport::new(
        "distill iam_reaches_student_optimum",
        vec![CheckRow {
            label: "final student loss".into(),
            empirical: iam_loss,
            reference: 1.1 * student_opt,
            ratio: iam_loss / (1.1 * student_opt),
            note: "one data pass, teacher loss as optimal-loss oracle".into(),
        }],
    ));

    let mut grid_rows = Vec::new();
    let mut best: Option<f64> = None;
    for lr in DISTILL_SGD_GRID {
        let builder = move |x: ParamVector| {
            let dim = x.len();
            OptimizerState::SgdMomentum {
                x,
                inner: SgdMomentumState::new(dim),
                gamma: lr,
                beta: 0.9,
            }
        };
        let outcome = mean_final_loss(&task, &x0, &builder, EXP_SEEDS, iters, batch)?;
        match outcome {
            Some(loss) => {
                best = Some(best.map_or(loss, |b: f64| b.min(loss)));
                grid_rows.push(CheckRow {
                    label: format!("sgd-m lr={lr}"),
                    empirical: loss,
                    reference: f64::NAN,
                    ratio: 0.0,
                    note: String::new(),
                });
            }
            None => grid_rows.push(CheckRow {
                label: format!("sgd-m lr={lr}"),
                empirical: f64::NAN,
                reference: f64::NAN,
                ratio: 0.0,
                note: "diverged, excluded".into(),
            }),
        }
    }
    let best = best.ok_or(Error::Config("every grid point diverged".into()))?;
    reports.push(CheckReport::new("distill sgd_grid", grid_rows));
    reports.push(CheckReport::new(
        "distill iam_vs_best_sgd",
        vec![CheckRow {
            label: "final student loss".into(),
            empirical: iam_loss,
            reference: 1.05 * best,
            ratio: iam_loss / (1.05 * best),
            note: "one data pass".into(),
        }],
    ));

    // A frozen second moment (beta2 = 1, v0 = 0) makes the preconditioner a
    // multiple of the identity; the trajectory must match plain IAM.
    let mut plain = IamState::new(x0.clone(), LambdaSchedule::Constant(9.0), OptLossMode::Teacher);
    let mut degenerate = IamState::with_adam(
        x0,
        LambdaSchedule::Constant(9.0),
        OptLossMode::Teacher,
        1.0,
        1e-8,
    );
    let mut rng_a = make_rng(0).split("sampler");
    let mut rng_b = make_rng(0).split("sampler");
    let mut worst = 0.0f64;
    for _ in 0..iters {
        let ba = sample_batch(&mut rng_a, n, batch)?;
        let bb = sample_batch(&mut rng_b, n, batch)?;
        plain.step(&task, &ba)?;
        degenerate.step(&task, &bb)?;
        worst = worst.max((&plain.x - &degenerate.x).norm());
    }
    reports.push(CheckReport::new(
        "distill adam_identity_degenerate",
        vec![CheckRow {
            label: "worst trajectory deviation".into(),
            empirical: worst,
            reference: 1e-8,
            ratio: worst / 1e-8,
            note: "iam-adam with frozen v vs iam".into(),
        }],
    ));

    Ok(reports)
}
