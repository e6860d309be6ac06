//! Iterate-averaging momentum with an adaptively minimized step size, plus
//! its diagonally preconditioned (Adam-style) variant.
//!
//! State carries two iterates: `z` takes the (preconditioned) Polyak-type
//! step, and `x` is the running convex combination
//! `x <- lambda/(1+lambda) x + 1/(1+lambda) z`. With `lambda == 0` the
//! scheme collapses to the plain Polyak step on `x`.

use super::finite_or_error;
use crate::problems::{OptLossMode, Problem};
use crate::rng::BatchSample;
use crate::{ParamVector, Result};

/// Averaging weight sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSchedule {
    /// `lambda_t = t`; the schedule behind the last-iterate guarantees.
    Linear,
    /// Fixed weight; `Constant(9)` corresponds to momentum `0.9`.
    Constant(f64),
}

impl LambdaSchedule {
    pub fn value(&self, t: usize) -> f64 {
        match self {
            LambdaSchedule::Linear => t as f64,
            LambdaSchedule::Constant(l) => *l,
        }
    }
}

/// Exponential moving average of squared gradients defining the diagonal
/// preconditioner `D = diag(sqrt(v) + eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamPreconditioner {
    pub v: ParamVector,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamPreconditioner {
    /// `beta2` may be 1.0, which freezes `v` (the identity-degenerate case).
    pub fn new(dim: usize, beta2: f64, eps: f64) -> Self {
        assert!((0.0..=1.0).contains(&beta2), "beta2 must lie in [0, 1]");
        assert!(eps > 0.0, "eps must be positive");
        AdamPreconditioner {
            v: ParamVector::zeros(dim),
            beta2,
            eps,
        }
    }

    pub fn update(&mut self, grad: &ParamVector) {
        let b = self.beta2;
        self.v.zip_apply(grad, |v, g| *v = b * *v + (1.0 - b) * g * g);
    }

    /// Squared norm of `g` under the inverse preconditioner:
    /// `sum_j g_j^2 / (sqrt(v_j) + eps)`.
    pub fn inv_norm_sq(&self, grad: &ParamVector) -> f64 {
        grad.iter()
            .zip(self.v.iter())
            .map(|(g, v)| g * g / (v.sqrt() + self.eps))
            .sum()
    }

    /// Applies `D^{-1}` to `g` elementwise.
    pub fn apply_inv(&self, grad: &ParamVector) -> ParamVector {
        ParamVector::from_fn(grad.len(), |j, _| grad[j] / (self.v[j].sqrt() + self.eps))
    }
}

/// Step size minimizing the one-step distance bound of the `z` iterate:
/// `(loss - opt_loss + <grad, z_prev - x>)_+` over the (preconditioned)
/// squared gradient norm, zero when the denominator vanishes.
pub fn iam_stepsize(
    loss: f64,
    opt_loss: f64,
    grad: &ParamVector,
    z_prev: &ParamVector,
    x: &ParamVector,
    pre: Option<&AdamPreconditioner>,
) -> f64 {
    let numerator = (loss - opt_loss + grad.dot(&(z_prev - x))).max(0.0);
    let denom = match pre {
        Some(p) => p.inv_norm_sq(grad),
        None => grad.norm_squared(),
    };
    assert!(denom >= 0.0, "squared gradient norm must be >= 0");
    if denom == 0.0 {
        0.0
    } else {
        numerator / denom
    }
}

#[derive(Debug, Clone)]
pub struct IamState {
    pub x: ParamVector,
    pub z: ParamVector,
    pub t: usize,
    pub lambda: LambdaSchedule,
    pub opt_loss: OptLossMode,
    pub precondition: Option<AdamPreconditioner>,
}

impl IamState {
    /// Fresh state with `z = x` at `t = 0`.
    pub fn new(x0: ParamVector, lambda: LambdaSchedule, opt_loss: OptLossMode) -> Self {
        IamState {
            z: x0.clone(),
            x: x0,
            t: 0,
            lambda,
            opt_loss,
            precondition: None,
        }
    }

    pub fn with_adam(
        x0: ParamVector,
        lambda: LambdaSchedule,
        opt_loss: OptLossMode,
        beta2: f64,
        eps: f64,
    ) -> Self {
        let pre = AdamPreconditioner::new(x0.len(), beta2, eps);
        let mut state = IamState::new(x0, lambda, opt_loss);
        state.precondition = Some(pre);
        state
    }

    /// One update; returns the step size used for the `z` move.
    pub fn step(&mut self, problem: &dyn Problem, batch: &BatchSample) -> Result<f64> {
        let (loss, grad) = problem.eval(batch, &self.x)?;
        let opt = problem.opt_loss(batch, self.opt_loss)?;
        if let Some(pre) = &mut self.precondition {
            pre.update(&grad);
        }
        let eta = iam_stepsize(
            loss,
            opt,
            &grad,
            &self.z,
            &self.x,
            self.precondition.as_ref(),
        );
        match &self.precondition {
            Some(pre) => {
                let direction = pre.apply_inv(&grad);
                self.z.axpy(-eta, &direction, 1.0);
            }
            None => self.z.axpy(-eta, &grad, 1.0),
        }
        let lambda_next = self.lambda.value(self.t + 1);
        if lambda_next == 0.0 {
            self.x.copy_from(&self.z);
        } else {
            let keep = lambda_next / (1.0 + lambda_next);
            let pull = 1.0 / (1.0 + lambda_next);
            self.x.zip_apply(&self.z, |x, z| *x = keep * *x + pull * z);
        }
        self.t += 1;
        finite_or_error(&self.x, "iterate after iam step")?;
        finite_or_error(&self.z, "averaging iterate after iam step")?;
        Ok(eta)
    }
}
