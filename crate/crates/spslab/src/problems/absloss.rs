//! Absolute-loss regression `f_i(x) = |a_i' x - b_i|`: convex, piecewise
//! linear, with per-component Lipschitz constant `||a_i||`. The subgradient
//! at a kink uses `sign(0) = 0`, so an exact fit takes no step.

use super::{Problem, ProblemConstants};
use crate::rng::make_rng;
use crate::{Error, ParamVector, Result};

#[derive(Debug, Clone)]
pub struct AbsoluteLossRegression {
    rows: Vec<ParamVector>,
    targets: Vec<f64>,
    interpolating: bool,
    solution: Option<(ParamVector, f64)>,
}

fn sign_zero(r: f64) -> f64 {
    if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl AbsoluteLossRegression {
    /// Builds an instance from explicit rows. When `interpolating_point` is
    /// given it must fit every row exactly; it becomes the known solution
    /// with optimal value zero.
    pub fn new(
        rows: Vec<ParamVector>,
        targets: Vec<f64>,
        interpolating_point: Option<ParamVector>,
    ) -> Result<Self> {
        if rows.is_empty() || rows.len() != targets.len() {
            return Err(Error::Invalid(
                "absolute loss: rows and targets must be equally sized and nonempty".into(),
            ));
        }
        let dim = rows[0].len();
        if rows.iter().any(|a| a.len() != dim) {
            return Err(Error::Invalid("absolute loss: ragged rows".into()));
        }
        if let Some(x) = &interpolating_point {
            for (a, b) in rows.iter().zip(&targets) {
                if (a.dot(x) - b).abs() > 1e-9 {
                    return Err(Error::Invalid(
                        "absolute loss: claimed interpolating point does not fit the data".into(),
                    ));
                }
            }
        }
        let solution = interpolating_point.map(|x| (x, 0.0));
        Ok(AbsoluteLossRegression {
            rows,
            targets,
            interpolating: solution.is_some(),
            solution,
        })
    }

    /// Random instance with standard-normal rows. Interpolating data is
    /// generated from a planted point, which is then the exact solution;
    /// otherwise targets carry additive noise and the solution is unknown.
    pub fn generate(n: usize, d: usize, interpolating: bool, noise: f64, seed: u64) -> Self {
        assert!(n >= 1 && d >= 1, "n and d must be positive");
        let root = make_rng(seed);
        let mut r_rows = root.split("rows");
        let mut r_plant = root.split("plant");
        let mut r_noise = root.split("noise");
        let planted = r_plant.normal_vector(d);
        let rows: Vec<ParamVector> = (0..n).map(|_| r_rows.normal_vector(d)).collect();
        let targets: Vec<f64> = rows
            .iter()
            .map(|a| {
                let clean = a.dot(&planted);
                if interpolating {
                    clean
                } else {
                    clean + noise * r_noise.standard_normal()
                }
            })
            .collect();
        let solution = interpolating.then_some((planted, 0.0));
        AbsoluteLossRegression {
            rows,
            targets,
            interpolating,
            solution,
        }
    }

    pub fn is_interpolating(&self) -> bool {
        self.interpolating
    }

    pub fn rows(&self) -> &[ParamVector] {
        &self.rows
    }
}

impl Problem for AbsoluteLossRegression {
    fn dim(&self) -> usize {
        self.rows[0].len()
    }

    fn n_components(&self) -> usize {
        self.rows.len()
    }

    fn component(&self, i: usize, x: &ParamVector, grad: &mut ParamVector) -> f64 {
        let r = self.rows[i].dot(x) - self.targets[i];
        grad.copy_from(&self.rows[i]);
        *grad *= sign_zero(r);
        r.abs()
    }

    fn component_loss(&self, i: usize, x: &ParamVector) -> f64 {
        (self.rows[i].dot(x) - self.targets[i]).abs()
    }

    fn solution(&self) -> Option<(&ParamVector, f64)> {
        self.solution.as_ref().map(|(x, f)| (x, *f))
    }

    fn component_opt_loss(&self, i: usize) -> Option<f64> {
        self.solution
            .as_ref()
            .map(|(x, _)| self.component_loss(i, x))
    }

    fn constants(&self, x0: &ParamVector) -> ProblemConstants {
        let n = self.rows.len() as f64;
        let mut c = ProblemConstants {
            g_sq: Some(self.rows.iter().map(|a| a.norm_squared()).sum::<f64>() / n),
            ..ProblemConstants::default()
        };
        if let Some((x_star, f_star)) = &self.solution {
            c.d_init = (x0 - x_star).norm();
            c.x_star = Some(x_star.clone());
            c.f_star = Some(*f_star);
            // Every |a'x - b| attains zero, so the mean component optimum is 0.
            c.delta_star = Some(*f_star);
            let sigma = self
                .rows
                .iter()
                .zip(&self.targets)
                .map(|(a, b)| {
                    let s = sign_zero(a.dot(x_star) - b);
                    s * s * a.norm_squared()
                })
                .sum::<f64>()
                / n;
            c.sigma_star_sq = Some(sigma);
        }
        c
    }
}
