//! Flat key-value experiment configuration with dotted sections
//! (`problem.*`, `optimizer.*`, `run.*`, `output.*`).
//!
//! Grammar: one `key = value` pair per line, `#` starts a comment, blank
//! lines are ignored. Unknown keys are rejected by name. `emit` prints the
//! fully resolved configuration in canonical order, and
//! `parse(emit(config)) == config` holds for every valid configuration.

use std::fmt::Write as _;
use std::path::Path;

use crate::optim::LambdaSchedule;
use crate::problems::OptLossMode;
use crate::rng::fnv1a;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemClass {
    Quadratic,
    AbsLoss,
    Poisson,
    Distillation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub class: ProblemClass,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub interpolated: bool,
    /// Offset spread for quadratic instances.
    pub nu: f64,
    /// Additive target noise for absolute-loss and distillation instances.
    pub noise: f64,
    pub d_teacher: usize,
    pub d_student: usize,
    /// External dataset for Poisson regression (`y,x1..xd` with header).
    pub csv: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Sps,
    SpsMax,
    SpsDamp,
    Iam,
    IamAdam,
    Sgd,
    SgdMomentum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    InvSqrt,
    FiniteHorizon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSpec {
    pub method: MethodKind,
    pub opt_loss: OptLossMode,
    pub lambda: LambdaSchedule,
    pub gamma_b: f64,
    pub epsilon: f64,
    pub lr: f64,
    pub schedule: ScheduleKind,
    /// Noise estimate for the finite-horizon step size.
    pub noise_estimate: f64,
    pub beta: f64,
    pub beta2: f64,
    pub eps_pre: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum X0Spec {
    Zeros,
    Gaussian(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub iters: usize,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    pub checkpoints: Vec<usize>,
    pub x0: X0Spec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: Option<String>,
    pub trajectory: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub optimizer: OptimizerSpec,
    pub run: RunSpec,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: ProblemSpec {
                class: ProblemClass::Quadratic,
                n: 50,
                d: 10,
                seed: 1,
                interpolated: false,
                nu: 0.1,
                noise: 0.0,
                d_teacher: 12,
                d_student: 10,
                csv: None,
            },
            optimizer: OptimizerSpec {
                method: MethodKind::Iam,
                opt_loss: OptLossMode::Theoretical,
                lambda: LambdaSchedule::Constant(9.0),
                gamma_b: 1.0,
                epsilon: 0.0,
                lr: 0.01,
                schedule: ScheduleKind::Constant,
                noise_estimate: 0.0,
                beta: 0.9,
                beta2: 0.999,
                eps_pre: 1e-8,
            },
            run: RunSpec {
                iters: 1000,
                batch_size: 1,
                seeds: (0..20).collect(),
                checkpoints: vec![10, 100, 1000],
                x0: X0Spec::Gaussian(1.0),
            },
            output: OutputSpec {
                dir: None,
                trajectory: false,
            },
        }
    }
}

fn parse_value<T: std::str::FromStr>(value: &str, line: usize, kind: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected {kind}, got `{value}`"),
    })
}

fn parse_bool(value: &str, line: usize) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Parse {
            line,
            msg: format!("expected true/false, got `{value}`"),
        }),
    }
}

/// Seed lists: either a half-open range `a..b` or a comma list.
fn parse_seeds(value: &str, line: usize) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: u64 = parse_value(lo.trim(), line, "integer")?;
        let hi: u64 = parse_value(hi.trim(), line, "integer")?;
        if hi <= lo {
            return Err(Error::Parse {
                line,
                msg: format!("empty seed range `{value}`"),
            });
        }
        return Ok((lo..hi).collect());
    }
    value
        .split(',')
        .map(|s| parse_value(s.trim(), line, "integer"))
        .collect()
}

fn parse_checkpoints(value: &str, line: usize) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|s| parse_value(s.trim(), line, "integer"))
        .collect()
}

fn emit_seeds(seeds: &[u64]) -> String {
    let contiguous = seeds
        .windows(2)
        .all(|w| w[1] == w[0] + 1);
    if seeds.len() > 1 && contiguous {
        format!("{}..{}", seeds[0], seeds[seeds.len() - 1] + 1)
    } else {
        seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn emit_f64(x: f64) -> String {
    format!("{x:?}")
}

impl ExperimentConfig {
    /// Canonical echo of the fully resolved configuration.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let p = &self.problem;
        let class = match p.class {
            ProblemClass::Quadratic => "quadratic",
            ProblemClass::AbsLoss => "absloss",
            ProblemClass::Poisson => "poisson",
            ProblemClass::Distillation => "distillation",
        };
        let _ = writeln!(out, "problem.class = {class}");
        let _ = writeln!(out, "problem.n = {}", p.n);
        let _ = writeln!(out, "problem.d = {}", p.d);
        let _ = writeln!(out, "problem.seed = {}", p.seed);
        let _ = writeln!(out, "problem.interpolated = {}", p.interpolated);
        let _ = writeln!(out, "problem.nu = {}", emit_f64(p.nu));
        let _ = writeln!(out, "problem.noise = {}", emit_f64(p.noise));
        let _ = writeln!(out, "problem.d_teacher = {}", p.d_teacher);
        let _ = writeln!(out, "problem.d_student = {}", p.d_student);
        if let Some(csv) = &p.csv {
            let _ = writeln!(out, "problem.csv = {csv}");
        }
        let o = &self.optimizer;
        let method = match o.method {
            MethodKind::Sps => "sps",
            MethodKind::SpsMax => "sps_max",
            MethodKind::SpsDamp => "sps_damp",
            MethodKind::Iam => "iam",
            MethodKind::IamAdam => "iam_adam",
            MethodKind::Sgd => "sgd",
            MethodKind::SgdMomentum => "sgd_momentum",
        };
        let _ = writeln!(out, "optimizer.method = {method}");
        let optloss = match o.opt_loss {
            OptLossMode::Theoretical => "theoretical".to_string(),
            OptLossMode::Averaged => "averaged".to_string(),
            OptLossMode::Zero => "zero".to_string(),
            OptLossMode::Teacher => "teacher".to_string(),
            OptLossMode::Constant(c) => format!("constant:{}", emit_f64(c)),
        };
        let _ = writeln!(out, "optimizer.optloss = {optloss}");
        let lambda = match o.lambda {
            LambdaSchedule::Linear => "linear".to_string(),
            LambdaSchedule::Constant(l) => emit_f64(l),
        };
        let _ = writeln!(out, "optimizer.lambda = {lambda}");
        let _ = writeln!(out, "optimizer.gamma_b = {}", emit_f64(o.gamma_b));
        let _ = writeln!(out, "optimizer.epsilon = {}", emit_f64(o.epsilon));
        let _ = writeln!(out, "optimizer.lr = {}", emit_f64(o.lr));
        let schedule = match o.schedule {
            ScheduleKind::Constant => "constant",
            ScheduleKind::InvSqrt => "inv_sqrt",
            ScheduleKind::FiniteHorizon => "finite_horizon",
        };
        let _ = writeln!(out, "optimizer.schedule = {schedule}");
        let _ = writeln!(out, "optimizer.noise_estimate = {}", emit_f64(o.noise_estimate));
        let _ = writeln!(out, "optimizer.beta = {}", emit_f64(o.beta));
        let _ = writeln!(out, "optimizer.beta2 = {}", emit_f64(o.beta2));
        let _ = writeln!(out, "optimizer.eps_pre = {}", emit_f64(o.eps_pre));
        let r = &self.run;
        let _ = writeln!(out, "run.iters = {}", r.iters);
        let _ = writeln!(out, "run.batch_size = {}", r.batch_size);
        let _ = writeln!(out, "run.seeds = {}", emit_seeds(&r.seeds));
        let _ = writeln!(
            out,
            "run.checkpoints = {}",
            r.checkpoints
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let x0 = match r.x0 {
            X0Spec::Zeros => "zeros".to_string(),
            X0Spec::Gaussian(s) => format!("gaussian:{}", emit_f64(s)),
        };
        let _ = writeln!(out, "run.x0 = {x0}");
        if let Some(dir) = &self.output.dir {
            let _ = writeln!(out, "output.dir = {dir}");
        }
        let _ = writeln!(out, "output.trajectory = {}", self.output.trajectory);
        out
    }

    /// Short fingerprint of the resolved configuration.
    pub fn digest(&self) -> String {
        format!("{:016x}", fnv1a(self.emit().as_bytes(), 0xcbf2_9ce4_8422_2325))
    }
}

/// Parses a configuration, starting from defaults; unknown keys and
/// malformed values are rejected with their line number.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "problem.class" => {
                config.problem.class = match value {
                    "quadratic" => ProblemClass::Quadratic,
                    "absloss" => ProblemClass::AbsLoss,
                    "poisson" => ProblemClass::Poisson,
                    "distillation" => ProblemClass::Distillation,
                    _ => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("unknown problem class `{value}`"),
                        })
                    }
                }
            }
            "problem.n" => config.problem.n = parse_value(value, line, "integer")?,
            "problem.d" => config.problem.d = parse_value(value, line, "integer")?,
            "problem.seed" => config.problem.seed = parse_value(value, line, "integer")?,
            "problem.interpolated" => config.problem.interpolated = parse_bool(value, line)?,
            "problem.nu" => config.problem.nu = parse_value(value, line, "number")?,
            "problem.noise" => config.problem.noise = parse_value(value, line, "number")?,
            "problem.d_teacher" => config.problem.d_teacher = parse_value(value, line, "integer")?,
            "problem.d_student" => config.problem.d_student = parse_value(value, line, "integer")?,
            "problem.csv" => config.problem.csv = Some(value.to_string()),
            "optimizer.method" => {
                config.optimizer.method = match value {
                    "sps" => MethodKind::Sps,
                    "sps_max" => MethodKind::SpsMax,
                    "sps_damp" => MethodKind::SpsDamp,
                    "iam" => MethodKind::Iam,
                    "iam_adam" => MethodKind::IamAdam,
                    "sgd" => MethodKind::Sgd,
                    "sgd_momentum" => MethodKind::SgdMomentum,
                    _ => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("unknown method `{value}`"),
                        })
                    }
                }
            }
            "optimizer.optloss" => {
                config.optimizer.opt_loss = if let Some(c) = value.strip_prefix("constant:") {
                    OptLossMode::Constant(parse_value(c, line, "number")?)
                } else {
                    match value {
                        "theoretical" => OptLossMode::Theoretical,
                        "averaged" => OptLossMode::Averaged,
                        "zero" => OptLossMode::Zero,
                        "teacher" => OptLossMode::Teacher,
                        _ => {
                            return Err(Error::Parse {
                                line,
                                msg: format!("unknown opt-loss mode `{value}`"),
                            })
                        }
                    }
                }
            }
            "optimizer.lambda" => {
                config.optimizer.lambda = if value == "linear" {
                    LambdaSchedule::Linear
                } else {
                    LambdaSchedule::Constant(parse_value(value, line, "number")?)
                }
            }
            "optimizer.gamma_b" => config.optimizer.gamma_b = parse_value(value, line, "number")?,
            "optimizer.epsilon" => config.optimizer.epsilon = parse_value(value, line, "number")?,
            "optimizer.lr" => config.optimizer.lr = parse_value(value, line, "number")?,
            "optimizer.schedule" => {
                config.optimizer.schedule = match value {
                    "constant" => ScheduleKind::Constant,
                    "inv_sqrt" => ScheduleKind::InvSqrt,
                    "finite_horizon" => ScheduleKind::FiniteHorizon,
                    _ => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("unknown schedule `{value}`"),
                        })
                    }
                }
            }
            "optimizer.noise_estimate" => {
                config.optimizer.noise_estimate = parse_value(value, line, "number")?
            }
            "optimizer.beta" => config.optimizer.beta = parse_value(value, line, "number")?,
            "optimizer.beta2" => config.optimizer.beta2 = parse_value(value, line, "number")?,
            "optimizer.eps_pre" => config.optimizer.eps_pre = parse_value(value, line, "number")?,
            "run.iters" => config.run.iters = parse_value(value, line, "integer")?,
            "run.batch_size" => config.run.batch_size = parse_value(value, line, "integer")?,
            "run.seeds" => config.run.seeds = parse_seeds(value, line)?,
            "run.checkpoints" => config.run.checkpoints = parse_checkpoints(value, line)?,
            "run.x0" => {
                config.run.x0 = if value == "zeros" {
                    X0Spec::Zeros
                } else if value == "gaussian" {
                    X0Spec::Gaussian(1.0)
                } else if let Some(s) = value.strip_prefix("gaussian:") {
                    X0Spec::Gaussian(parse_value(s, line, "number")?)
                } else {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown x0 spec `{value}`"),
                    });
                }
            }
            "output.dir" => config.output.dir = Some(value.to_string()),
            "output.trajectory" => config.output.trajectory = parse_bool(value, line)?,
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{key}`"),
                })
            }
        }
    }
    validate(&config)?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

fn validate(config: &ExperimentConfig) -> Result<()> {
    if config.run.batch_size == 0 {
        return Err(Error::Config("run.batch_size must be positive".into()));
    }
    if config.run.seeds.is_empty() {
        return Err(Error::Config("run.seeds must be nonempty".into()));
    }
    if config.problem.class == ProblemClass::Distillation
        && config.problem.d_student > config.problem.d_teacher
    {
        return Err(Error::Config(
            "problem.d_student must not exceed problem.d_teacher".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_resolves_to_defaults() {
        let config = parse_config_str("problem.class = quadratic\n").unwrap();
        assert_eq!(config, ExperimentConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        match parse_config_str("optimizer.learning_rat = 0.1\n") {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 1);
                assert!(msg.contains("learning_rat"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "\n# header\nproblem.n = 7 # trailing\n\n";
        let config = parse_config_str(text).unwrap();
        assert_eq!(config.problem.n, 7);
    }

    #[test]
    fn round_trip_through_emit() {
        let mut config = ExperimentConfig::default();
        config.problem.class = ProblemClass::Distillation;
        config.problem.seed = 99;
        config.problem.csv = None;
        config.optimizer.method = MethodKind::IamAdam;
        config.optimizer.opt_loss = OptLossMode::Constant(0.125);
        config.optimizer.lambda = LambdaSchedule::Linear;
        config.run.seeds = vec![3, 5, 8];
        config.run.checkpoints = vec![10, 100];
        config.run.x0 = X0Spec::Zeros;
        config.output.dir = Some("out/run1".into());
        config.output.trajectory = true;
        let echoed = config.emit();
        let parsed = parse_config_str(&echoed).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn round_trip_preserves_seed_ranges() {
        let config = parse_config_str("run.seeds = 4..9\n").unwrap();
        assert_eq!(config.run.seeds, vec![4, 5, 6, 7, 8]);
        let parsed = parse_config_str(&config.emit()).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn digest_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = ExperimentConfig::default();
        b.problem.seed = 2;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), ExperimentConfig::default().digest());
    }

    #[test]
    fn bad_values_carry_line_numbers() {
        match parse_config_str("problem.n = 5\nproblem.nu = abc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
