//! End-to-end smoke tests of the command-line interface.

use std::io::Write;
use std::process::Command;

fn spslab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spslab"))
}

#[test]
fn run_then_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.cfg");
    let out_dir = dir.path().join("out");
    let mut f = std::fs::File::create(&config_path).unwrap();
    writeln!(
        f,
        "problem.class = quadratic\nproblem.n = 12\nproblem.d = 4\nproblem.seed = 3\n\
         optimizer.method = sps\nrun.iters = 30\nrun.seeds = 0..3\n"
    )
    .unwrap();

    let run = spslab()
        .args(["run"])
        .arg(&config_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    // The resolved config is echoed before the per-seed lines.
    assert!(stdout.contains("problem.class = quadratic"));
    assert!(stdout.contains("seed 2: rows=31"));
    for seed in 0..3 {
        assert!(out_dir.join(format!("trajectory_seed{seed}.csv")).is_file());
    }

    let report = spslab().args(["report"]).arg(&out_dir).output().unwrap();
    assert!(report.status.success());
    let text = String::from_utf8_lossy(&report.stdout);
    assert!(text.starts_with("file,rows,final_loss_full,final_cesaro_loss"));
    assert!(text.contains("trajectory_seed0.csv,31,"));
}

#[test]
fn verify_lemmas_exits_zero() {
    let out = spslab().args(["verify", "lemmas"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[PASS] lemma psi_roundtrip"));
    assert!(text.contains("0 failed"));
}

#[test]
fn unknown_suite_is_rejected() {
    let out = spslab().args(["verify", "nonsense"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn bad_config_lines_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.cfg");
    std::fs::write(&config_path, "problem.class = quadratic\noptimizer.lrr = 3\n").unwrap();
    let out = spslab().args(["run"]).arg(&config_path).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("optimizer.lrr"), "{err}");
}

#[test]
fn grid_runs_directory_of_configs() {
    let dir = tempfile::tempdir().unwrap();
    for (name, lr) in [("a", 0.05), ("b", 0.005)] {
        std::fs::write(
            dir.path().join(format!("{name}.cfg")),
            format!(
                "problem.class = quadratic\nproblem.n = 12\nproblem.d = 4\nproblem.seed = 3\n\
                 optimizer.method = sgd\noptimizer.lr = {lr}\nrun.iters = 50\nrun.seeds = 0..2\n"
            ),
        )
        .unwrap();
    }
    let out = spslab().args(["grid"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("label,final_loss,status"));
    assert!(text.contains("a,"), "{text}");
    assert!(text.contains(",best"), "{text}");
}

/// Golden trajectory: the full pipeline (stream splitting, batch sampling,
/// problem generation, the step rule and the CSV encoding) is pinned to the
/// byte. Any change to one of those layers must show up here.
#[test]
fn golden_trajectory_is_frozen() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("golden.cfg"),
        format!(
            "problem.class = quadratic\nproblem.n = 4\nproblem.d = 2\nproblem.seed = 7\n\
             optimizer.method = sps\nrun.iters = 3\nrun.batch_size = 1\n\
             run.seeds = 0\noutput.trajectory = true\noutput.dir = {}\n",
            dir.path().display()
        ),
    )
    .unwrap();
    let out = spslab()
        .args(["run"])
        .arg(dir.path().join("golden.cfg"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got = std::fs::read_to_string(dir.path().join("trajectory_seed0.csv")).unwrap();
    let expect = "\
t,loss_full,loss_batch,stepsize,dist_to_opt,cesaro_loss
0,5.6368204384959597e0,7.2114062395356049e0,1.1693245476118017e-1,1.9522239923964613e0,5.6368204384959597e0
1,2.3768238375221107e0,1.2503790550001452e0,6.3023592471066381e-1,1.2251279430751141e0,5.6368204384959597e0
2,1.0537729725497038e0,1.2699241338715195e0,1.3392234704007347e-1,6.6253366199384844e-1,3.7445983491084180e0
3,7.1463816703352689e-1,nan,nan,3.4154783038472986e-1,2.5316583088624220e0
";
    assert_eq!(got, expect);
}
