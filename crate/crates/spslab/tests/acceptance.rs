//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with its runtime and failing loudly with the full report text otherwise.

use std::sync::LazyLock;
use std::time::{Duration, Instant};

use spslab::analysis::{reports_to_csv, reports_to_text, CheckReport};
use spslab::harness::{
    distillation_checks, equivalence_checks, lemma_checks, misspecification_checks,
    monotonicity_checks, parse_config_str, poisson_checks, rate_checks, run_experiment, run_suite,
    Suite,
};

struct Timed {
    reports: Vec<CheckReport>,
    elapsed: Duration,
}

fn timed(f: impl FnOnce() -> spslab::Result<Vec<CheckReport>>) -> Timed {
    let start = Instant::now();
    let reports = f().expect("suite construction failed");
    Timed {
        reports,
        elapsed: start.elapsed(),
    }
}

static RATES: LazyLock<Timed> = LazyLock::new(|| timed(rate_checks));

fn gate(criterion: &str, reports: &[&CheckReport], elapsed: Duration, limit_secs: f64) {
    assert!(!reports.is_empty(), "{criterion}: no checks selected");
    let ok = reports.iter().all(|r| r.passed);
    let secs = elapsed.as_secs_f64();
    println!(
        "[{}] {criterion} ({secs:.2}s, {} checks)",
        if ok { "PASS" } else { "FAIL" },
        reports.len()
    );
    if !ok {
        for r in reports {
            eprint!("{}", r.to_text());
        }
        panic!("{criterion}: checks failed");
    }
    assert!(
        secs <= limit_secs,
        "{criterion}: runtime {secs:.2}s exceeds the {limit_secs}s budget"
    );
}

fn gate_all(criterion: &str, timed: &Timed, limit_secs: f64) {
    let refs: Vec<&CheckReport> = timed.reports.iter().collect();
    gate(criterion, &refs, timed.elapsed, limit_secs);
}

fn gate_named(criterion: &str, timed: &Timed, names: &[&str], limit_secs: f64) {
    let refs: Vec<&CheckReport> = names
        .iter()
        .map(|n| {
            timed
                .reports
                .iter()
                .find(|r| r.name == *n)
                .unwrap_or_else(|| panic!("{criterion}: check `{n}` missing"))
        })
        .collect();
    gate(criterion, &refs, timed.elapsed, limit_secs);
}

#[test]
fn criterion_01_lemma_oracles() {
    gate_all("criterion 1: lemma oracles", &timed(lemma_checks), 5.0);
}

#[test]
fn criterion_02_monotonicity() {
    gate_all(
        "criterion 2: path-wise monotonicity and boundedness",
        &timed(monotonicity_checks),
        30.0,
    );
}

#[test]
fn criterion_03_nonsmooth_rates() {
    gate_named(
        "criterion 3: non-smooth rate certificates",
        &RATES,
        &[
            "rate nonsmooth_avg sps absloss",
            "rate nonsmooth_last iam absloss",
        ],
        60.0,
    );
}

#[test]
fn criterion_04_smooth_rates() {
    gate_named(
        "criterion 4: smooth rate certificates and interpolation slope",
        &RATES,
        &[
            "rate smooth_avg sps quad",
            "rate smooth_avg_sigma sps quad",
            "rate interp_slope sps quad",
            "rate smooth_last iam quad",
        ],
        60.0,
    );
}

#[test]
fn criterion_05_strongly_convex_rate() {
    gate_named(
        "criterion 5: strongly convex squared-distance certificate",
        &RATES,
        &["rate strong_convex_dist sps quad"],
        60.0,
    );
}

#[test]
fn criterion_06_momentum_equivalence() {
    gate_all(
        "criterion 6: heavy-ball equivalence",
        &timed(equivalence_checks),
        1.0,
    );
}

#[test]
fn criterion_07_misspecification() {
    gate_all(
        "criterion 7: misspecified optimal batch loss",
        &timed(misspecification_checks),
        60.0,
    );
}

#[test]
fn criterion_08_poisson_vs_grid() {
    gate_all(
        "criterion 8: untuned adaptive step vs tuned SGD on Poisson",
        &timed(poisson_checks),
        120.0,
    );
}

#[test]
fn criterion_09_distillation() {
    gate_all(
        "criterion 9: teacher-as-oracle distillation",
        &timed(distillation_checks),
        60.0,
    );
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let first = run_suite(Suite::All);
    let second = run_suite(Suite::All);
    assert_eq!(
        reports_to_text(&first),
        reports_to_text(&second),
        "verification text reports differ between runs"
    );
    assert_eq!(
        reports_to_csv(&first),
        reports_to_csv(&second),
        "verification CSV reports differ between runs"
    );
    assert!(first.iter().all(|r| r.passed), "verify all must pass");

    // Trajectory CSVs must also be byte-identical run to run.
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let base = "\
problem.class = quadratic
problem.n = 20
problem.d = 6
problem.seed = 5
optimizer.method = iam
run.iters = 200
run.batch_size = 2
run.seeds = 0..4
output.trajectory = true
";
    for dir in [dir_a.path(), dir_b.path()] {
        let text = format!("{base}output.dir = {}\n", dir.display());
        let config = parse_config_str(&text).unwrap();
        run_experiment(&config).unwrap();
    }
    for seed in 0..4 {
        let name = format!("trajectory_seed{seed}.csv");
        let a = std::fs::read(dir_a.path().join(&name)).unwrap();
        let b = std::fs::read(dir_b.path().join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    println!(
        "[PASS] criterion 10: determinism of verify all and trajectory CSVs ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}
