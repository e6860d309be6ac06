//! Stochastic finite-sum problems with analytic gradients, known solutions
//! where the instance allows it, and computable rate constants.

mod absloss;
mod csvdata;
mod distill;
mod poisson;
mod quadratic;

pub use absloss::AbsoluteLossRegression;
pub use csvdata::load_xy_csv;
pub use distill::DistillationTask;
pub use poisson::PoissonRegression;
pub use quadratic::QuadraticFiniteSum;

use crate::rng::BatchSample;
use crate::{Error, ParamVector, Result};

/// How the per-batch optimal loss fed to Polyak-type step sizes is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptLossMode {
    /// Exact batch value at the solution: mean of the component optimal
    /// losses over the realized batch.
    Theoretical,
    /// Full objective value at the solution, reused for every batch.
    Averaged,
    /// Zero lower bound.
    Zero,
    /// The teacher model's loss on the same batch.
    Teacher,
    /// A fixed caller-supplied constant.
    Constant(f64),
}

/// Constants of a problem instance used to build rate certificates.
///
/// Optional fields are absent when the problem class cannot provide them.
/// `empirical` marks constants that are ball estimates rather than exact
/// values; certificates built from them are advisory.
#[derive(Debug, Clone, Default)]
pub struct ProblemConstants {
    /// Initial distance to the solution.
    pub d_init: f64,
    /// Bound on the expected squared (sub)gradient norm over the ball of
    /// radius `d_init` around the solution.
    pub g_sq: Option<f64>,
    /// Uniform smoothness constant of the component losses on that ball.
    pub l_smooth: Option<f64>,
    /// Quadratic-growth constant of the full objective.
    pub mu: Option<f64>,
    /// Function noise: full optimum minus the mean of component optima.
    pub delta_star: Option<f64>,
    /// Gradient noise: mean squared component gradient norm at the solution.
    pub sigma_star_sq: Option<f64>,
    pub x_star: Option<ParamVector>,
    pub f_star: Option<f64>,
    pub empirical: bool,
}

/// A sampleable finite-sum objective with analytic (sub)gradients.
pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;

    /// Number of components in the finite sum.
    fn n_components(&self) -> usize;

    /// Loss of component `i` at `x`; writes the (sub)gradient into `grad`.
    fn component(&self, i: usize, x: &ParamVector, grad: &mut ParamVector) -> f64;

    fn component_loss(&self, i: usize, x: &ParamVector) -> f64;

    /// Known minimizer and optimal value, when available.
    fn solution(&self) -> Option<(&ParamVector, f64)>;

    /// Component loss at the solution, when the solution is known.
    fn component_opt_loss(&self, i: usize) -> Option<f64>;

    /// Teacher loss over the batch; only distillation tasks provide one.
    fn teacher_batch_loss(&self, _batch: &BatchSample) -> Option<f64> {
        None
    }

    /// Fills every constant computable for this problem class.
    fn constants(&self, x0: &ParamVector) -> ProblemConstants;

    /// Batch loss and (sub)gradient: means over the batch components.
    fn eval(&self, batch: &BatchSample, x: &ParamVector) -> Result<(f64, ParamVector)> {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        let inv = 1.0 / batch.batch_size() as f64;
        let mut grad = ParamVector::zeros(self.dim());
        let mut acc = ParamVector::zeros(self.dim());
        let mut loss = 0.0;
        for &i in &batch.indices {
            loss += self.component(i, x, &mut grad);
            acc += &grad;
        }
        loss *= inv;
        acc *= inv;
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                what: "batch loss".into(),
                iteration: None,
            });
        }
        if acc.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                what: "batch gradient".into(),
                iteration: None,
            });
        }
        Ok((loss, acc))
    }

    /// Full objective: mean over all components.
    fn full_loss(&self, x: &ParamVector) -> f64 {
        let n = self.n_components();
        (0..n).map(|i| self.component_loss(i, x)).sum::<f64>() / n as f64
    }

    /// Full (sub)gradient: mean over all components.
    fn full_grad(&self, x: &ParamVector) -> ParamVector {
        let n = self.n_components();
        let mut grad = ParamVector::zeros(self.dim());
        let mut acc = ParamVector::zeros(self.dim());
        for i in 0..n {
            self.component(i, x, &mut grad);
            acc += &grad;
        }
        acc / n as f64
    }

    /// Optimal-loss value for the batch under the given mode.
    fn opt_loss(&self, batch: &BatchSample, mode: OptLossMode) -> Result<f64> {
        match mode {
            OptLossMode::Zero => Ok(0.0),
            OptLossMode::Constant(c) => Ok(c),
            OptLossMode::Averaged => self
                .solution()
                .map(|(_, f_star)| f_star)
                .ok_or(Error::Config(
                    "averaged opt-loss mode requires a known solution".into(),
                )),
            OptLossMode::Theoretical => {
                let mut sum = 0.0;
                for &i in &batch.indices {
                    sum += self.component_opt_loss(i).ok_or(Error::Config(
                        "theoretical opt-loss mode requires a known solution".into(),
                    ))?;
                }
                Ok(sum / batch.batch_size() as f64)
            }
            OptLossMode::Teacher => self.teacher_batch_loss(batch).ok_or(Error::Config(
                "teacher opt-loss mode requires a problem with a teacher".into(),
            )),
        }
    }
}

impl ProblemConstants {
    /// Internal consistency checks; tolerances absorb rounding.
    pub fn validate(&self) -> Result<()> {
        if self.d_init < 0.0 {
            return Err(Error::Invalid("d_init must be >= 0".into()));
        }
        if let Some(d) = self.delta_star {
            if d < -1e-9 {
                return Err(Error::Invalid(format!("delta_star {d} must be >= 0")));
            }
        }
        if let Some(s) = self.sigma_star_sq {
            if s < -1e-9 {
                return Err(Error::Invalid(format!("sigma_star_sq {s} must be >= 0")));
            }
        }
        if let (Some(s), Some(l), Some(d)) = (self.sigma_star_sq, self.l_smooth, self.delta_star) {
            if s > 2.0 * l * d + 1e-9 * (1.0 + s.abs()) {
                return Err(Error::Invalid(format!(
                    "sigma_star_sq {s} exceeds 2*L*delta_star {}",
                    2.0 * l * d
                )));
            }
        }
        Ok(())
    }
}
