//! Poisson regression with the exponential link:
//! `f_i(w) = exp(w' x_i) - y_i (w' x_i)`. Convex and twice differentiable,
//! but neither globally Lipschitz nor globally smooth, which is exactly why
//! it is a useful stress test. The full-batch solution is found by a damped
//! Newton solve; ball constants are suprema in closed form and flagged as
//! empirical since no global constants exist.

use nalgebra::DMatrix;

use super::{csvdata, Problem, ProblemConstants};
use crate::rng::make_rng;
use crate::{Error, ParamVector, Result};

#[derive(Debug, Clone)]
pub struct PoissonRegression {
    rows: Vec<ParamVector>,
    counts: Vec<f64>,
    solution: Option<(ParamVector, f64)>,
}

/// `y ln y` with the `0 ln 0 = 0` convention.
fn y_log_y(y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        y * y.ln()
    }
}

impl PoissonRegression {
    pub fn new(rows: Vec<ParamVector>, counts: Vec<f64>) -> Result<Self> {
        if rows.is_empty() || rows.len() != counts.len() {
            return Err(Error::Invalid(
                "poisson: rows and counts must be equally sized and nonempty".into(),
            ));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Invalid("poisson: ragged rows".into()));
        }
        if counts.iter().any(|y| *y < 0.0 || !y.is_finite()) {
            return Err(Error::Invalid("poisson: counts must be finite and >= 0".into()));
        }
        Ok(PoissonRegression {
            rows,
            counts,
            solution: None,
        })
    }

    /// Synthetic instance: features standard normal scaled by `1/sqrt(d)`,
    /// counts drawn Poisson from a planted weight vector. The plant is kept
    /// at half scale so rates stay desk-sized and realized losses positive.
    pub fn generate(n: usize, d: usize, seed: u64) -> Self {
        assert!(n >= 1 && d >= 1, "n and d must be positive");
        let root = make_rng(seed);
        let mut r_rows = root.split("rows");
        let mut r_plant = root.split("plant");
        let mut r_counts = root.split("counts");
        let scale = 1.0 / (d as f64).sqrt();
        let planted = r_plant.normal_vector(d) * 0.5;
        let rows: Vec<ParamVector> = (0..n).map(|_| r_rows.normal_vector(d) * scale).collect();
        let counts: Vec<f64> = rows
            .iter()
            .map(|x| r_counts.poisson(x.dot(&planted).exp()) as f64)
            .collect();
        PoissonRegression {
            rows,
            counts,
            solution: None,
        }
    }

    /// Loads `y,x1..xd` data; first column is the count target.
    pub fn from_csv(path: &std::path::Path) -> Result<Self> {
        let (rows, targets) = csvdata::load_xy_csv(path)?;
        PoissonRegression::new(rows, targets)
    }

    /// Damped Newton solve of the full objective; caches the minimizer.
    pub fn solve(&mut self) -> Result<(ParamVector, f64)> {
        if self.solution.is_none() {
            let d = self.dim();
            let n = self.rows.len() as f64;
            let mut w = ParamVector::zeros(d);
            let mut loss = self.full_loss(&w);
            for _ in 0..200 {
                let mut grad = ParamVector::zeros(d);
                let mut hess = DMatrix::<f64>::zeros(d, d);
                for (x, &y) in self.rows.iter().zip(&self.counts) {
                    let rate = x.dot(&w).exp();
                    grad += x * (rate - y);
                    hess.ger(rate, x, x, 1.0);
                }
                grad /= n;
                hess /= n;
                if grad.norm() <= 1e-12 {
                    break;
                }
                for j in 0..d {
                    hess[(j, j)] += 1e-12;
                }
                let chol = hess
                    .cholesky()
                    .ok_or_else(|| Error::Degenerate("singular curvature in Newton solve".into()))?;
                let direction = chol.solve(&grad);
                if direction.norm() <= 1e-15 * (1.0 + w.norm()) {
                    break;
                }
                // Near the optimum the decrement drops below float
                // resolution; accept within rounding noise.
                let accept = loss + 1e-14 * (1.0 + loss.abs());
                let mut step = 1.0;
                loop {
                    let candidate = &w - &direction * step;
                    let candidate_loss = self.full_loss(&candidate);
                    if candidate_loss.is_finite() && candidate_loss <= accept {
                        w = candidate;
                        loss = candidate_loss;
                        break;
                    }
                    step *= 0.5;
                    if step < 1e-12 {
                        break;
                    }
                }
            }
            let f_star = self.full_loss(&w);
            self.solution = Some((w, f_star));
        }
        let (w, f) = self.solution.as_ref().unwrap();
        Ok((w.clone(), *f))
    }

    /// Mean of the component infima `y - y ln y` (each `f_i` is minimized at
    /// the linear predictor `ln y_i`).
    pub fn mean_component_infimum(&self) -> f64 {
        self.counts
            .iter()
            .map(|&y| y - y_log_y(y))
            .sum::<f64>()
            / self.counts.len() as f64
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }
}

impl Problem for PoissonRegression {
    fn dim(&self) -> usize {
        self.rows[0].len()
    }

    fn n_components(&self) -> usize {
        self.rows.len()
    }

    fn component(&self, i: usize, x: &ParamVector, grad: &mut ParamVector) -> f64 {
        let z = self.rows[i].dot(x);
        let rate = z.exp();
        grad.copy_from(&self.rows[i]);
        *grad *= rate - self.counts[i];
        rate - self.counts[i] * z
    }

    fn component_loss(&self, i: usize, x: &ParamVector) -> f64 {
        let z = self.rows[i].dot(x);
        z.exp() - self.counts[i] * z
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
        let mut c = ProblemConstants {
            empirical: true,
            ..ProblemConstants::default()
        };
        if let Some((w_star, f_star)) = &self.solution {
            let n = self.rows.len() as f64;
            let d_init = (x0 - w_star).norm();
            c.d_init = d_init;
            c.x_star = Some(w_star.clone());
            c.f_star = Some(*f_star);
            c.delta_star = Some((f_star - self.mean_component_infimum()).max(0.0));
            c.sigma_star_sq = Some(
                self.rows
                    .iter()
                    .zip(&self.counts)
                    .map(|(x, &y)| {
                        let r = x.dot(w_star).exp() - y;
                        r * r * x.norm_squared()
                    })
                    .sum::<f64>()
                    / n,
            );
            // Suprema over the ball of radius d_init around the solution:
            // the component Hessian is x_i x_i' exp(z) and |z - z*| <= D||x_i||.
            let mut l_ball = 0f64;
            let mut g_ball = 0f64;
            for (x, &y) in self.rows.iter().zip(&self.counts) {
                let norm = x.norm();
                let z_star = x.dot(w_star);
                let z_hi = z_star + d_init * norm;
                let z_lo = z_star - d_init * norm;
                l_ball = l_ball.max(norm * norm * z_hi.exp());
                let dev = (z_hi.exp() - y).abs().max((z_lo.exp() - y).abs());
                g_ball += norm * norm * dev * dev;
            }
            c.l_smooth = Some(l_ball);
            c.g_sq = Some(g_ball / n);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::BatchSample;
    use crate::testutil;
    use approx::assert_relative_eq;

    #[test]
    fn origin_loss_is_one_per_sample() {
        let p = PoissonRegression::generate(30, 6, 0);
        let w = ParamVector::zeros(6);
        for i in 0..30 {
            assert_relative_eq!(p.component_loss(i, &w), 1.0, epsilon = 1e-12);
        }
        let mut grad = ParamVector::zeros(6);
        p.component(3, &w, &mut grad);
        let expect = &p.rows[3] * (1.0 - p.counts[3]);
        assert_relative_eq!(grad, expect, epsilon = 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = PoissonRegression::generate(20, 5, 1);
        testutil::finite_difference_sweep(&p, 100, 31, 1e-5);
    }

    #[test]
    fn convexity_probe() {
        let p = PoissonRegression::generate(20, 5, 2);
        testutil::convexity_sweep(&p, 100, 32);
    }

    #[test]
    fn newton_finds_stationary_point() {
        let mut p = PoissonRegression::generate(60, 6, 3);
        let (w_star, f_star) = p.solve().unwrap();
        assert!(p.full_grad(&w_star).norm() <= 1e-10);
        assert!(f_star.is_finite());
    }

    #[test]
    fn component_infimum_formula() {
        // min_z e^z - y z is attained at z = ln y with value y - y ln y.
        for &y in &[0.5, 1.0, 3.0, 7.0] {
            let direct = (0..20000)
                .map(|k| {
                    let z = -10.0 + k as f64 * 1e-3;
                    z.exp() - y * z
                })
                .fold(f64::INFINITY, f64::min);
            assert!((direct - (y - y_log_y(y))).abs() < 1e-5);
        }
    }

    #[test]
    fn constants_are_flagged_empirical_and_consistent() {
        let mut p = PoissonRegression::generate(50, 5, 4);
        p.solve().unwrap();
        let x0 = ParamVector::zeros(5);
        let c = p.constants(&x0);
        assert!(c.empirical);
        assert!(c.delta_star.unwrap() >= 0.0);
        assert!(c.l_smooth.unwrap() > 0.0);
        assert!(c.g_sq.unwrap() > 0.0);
        // sigma* is dominated by the ball gradient bound.
        assert!(c.sigma_star_sq.unwrap() <= c.g_sq.unwrap() + 1e-9);
    }

    #[test]
    fn loads_external_dataset() {
        use std::io::Write;
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "y,x1,x2").unwrap();
        writeln!(file, "2,0.1,-0.4").unwrap();
        writeln!(file, "0,0.3,0.2").unwrap();
        writeln!(file, "5,-0.2,0.6").unwrap();
        file.flush().unwrap();
        let mut p = PoissonRegression::from_csv(file.path()).unwrap();
        assert_eq!(p.n_components(), 3);
        assert_eq!(p.counts(), &[2.0, 0.0, 5.0]);
        let (w, _) = p.solve().unwrap();
        assert!(p.full_grad(&w).norm() <= 1e-8);
    }

    #[test]
    fn divergent_point_fails_fast() {
        let p = PoissonRegression::generate(10, 4, 5);
        // Align with the first row so the linear predictor overflows exp().
        let huge = &p.rows[0] * 1e6;
        let batch = BatchSample::single(0);
        assert!(p.eval(&batch, &huge).is_err());
    }
}
