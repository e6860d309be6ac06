//! Heavy-ball momentum, the parameter mapping that reproduces the
//! iterate-averaging scheme, and SGD baselines.

use crate::ParamVector;

/// Heavy-ball state: `m <- beta m + g`, `x <- x - gamma m`, `m_{-1} = 0`.
#[derive(Debug, Clone)]
pub struct HeavyBallState {
    pub x: ParamVector,
    pub m: ParamVector,
    pub t: usize,
}

impl HeavyBallState {
    pub fn new(x0: ParamVector) -> Self {
        let m = ParamVector::zeros(x0.len());
        HeavyBallState { x: x0, m, t: 0 }
    }

    pub fn step(&mut self, grad: &ParamVector, beta: f64, gamma: f64) {
        self.m.axpy(1.0, grad, beta);
        self.x.axpy(-gamma, &self.m, 1.0);
        self.t += 1;
    }
}

/// Heavy-ball parameters equivalent to one iterate-averaging step:
/// `beta_t = lambda_t/(1+lambda_t) * eta_{t-1}/eta_t` and
/// `gamma_t = eta_t/(1+lambda_{t+1})`.
///
/// At `t = 0` the momentum buffer is zero, so `beta_0` is inert; callers
/// pass `lambda_t = 0` there (or use the flag below). A vanishing `eta_t`
/// leaves `beta` undefined; we return zero and clear `beta_defined`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumParams {
    pub beta: f64,
    pub gamma: f64,
    pub beta_defined: bool,
}

pub fn momentum_params_from_iam(
    lambda_t: f64,
    lambda_next: f64,
    eta_prev: f64,
    eta_t: f64,
) -> MomentumParams {
    let gamma = eta_t / (1.0 + lambda_next);
    if eta_t == 0.0 {
        return MomentumParams {
            beta: 0.0,
            gamma,
            beta_defined: false,
        };
    }
    MomentumParams {
        beta: lambda_t / (1.0 + lambda_t) * (eta_prev / eta_t),
        gamma,
        beta_defined: true,
    }
}

/// Plain gradient step `x <- x - gamma g`.
pub fn sgd_step(x: &mut ParamVector, grad: &ParamVector, gamma: f64) {
    x.axpy(-gamma, grad, 1.0);
}

/// Step-size rules for the SGD baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SgdSchedule {
    Constant(f64),
    /// `gamma_0 / sqrt(t + 1)`.
    InvSqrt(f64),
    /// Fixed-horizon choice `gamma_0 / sqrt(noise * horizon + 1)`; with a
    /// zero noise estimate this is just `gamma_0`.
    FiniteHorizon {
        gamma0: f64,
        noise: f64,
        horizon: usize,
    },
}

impl SgdSchedule {
    pub fn stepsize(&self, t: usize) -> f64 {
        match self {
            SgdSchedule::Constant(g) => *g,
            SgdSchedule::InvSqrt(g0) => g0 / ((t + 1) as f64).sqrt(),
            SgdSchedule::FiniteHorizon {
                gamma0,
                noise,
                horizon,
            } => gamma0 / (noise * *horizon as f64 + 1.0).sqrt(),
        }
    }
}

/// Dampened momentum baseline: `m <- beta m + (1 - beta) g`,
/// `x <- x - gamma m`. The dampening keeps tuned step sizes comparable to
/// plain SGD.
#[derive(Debug, Clone)]
pub struct SgdMomentumState {
    pub m: ParamVector,
}

impl SgdMomentumState {
    pub fn new(dim: usize) -> Self {
        SgdMomentumState {
            m: ParamVector::zeros(dim),
        }
    }

    pub fn step(&mut self, x: &mut ParamVector, grad: &ParamVector, gamma: f64, beta: f64) {
        self.m.axpy(1.0 - beta, grad, beta);
        x.axpy(-gamma, &self.m, 1.0);
    }
}
