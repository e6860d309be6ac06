//! Step-size rules and update schemes as pure state transitions.

mod iam;
mod momentum;
mod sps;

pub use iam::{iam_stepsize, AdamPreconditioner, IamState, LambdaSchedule};
pub use momentum::{
    momentum_params_from_iam, sgd_step, HeavyBallState, MomentumParams, SgdMomentumState,
    SgdSchedule,
};
pub use sps::{polyak_stepsize, sps_step, sps_stepsize, SpsConfig, SpsVariant};

use crate::problems::Problem;
use crate::rng::BatchSample;
use crate::{Error, ParamVector, Result};

pub(crate) fn finite_or_error(x: &ParamVector, what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: what.into(),
            iteration: None,
        })
    }
}

/// A method instance mid-run. Each step consumes one batch and returns the
/// step size it emitted; states are self-contained and movable across
/// threads.
#[derive(Debug, Clone)]
pub enum OptimizerState {
    Sps { x: ParamVector, config: SpsConfig },
    Iam(IamState),
    Sgd { x: ParamVector, schedule: SgdSchedule, t: usize },
    SgdMomentum {
        x: ParamVector,
        inner: SgdMomentumState,
        gamma: f64,
        beta: f64,
    },
}

impl OptimizerState {
    pub fn x(&self) -> &ParamVector {
        match self {
            OptimizerState::Sps { x, .. } => x,
            OptimizerState::Iam(state) => &state.x,
            OptimizerState::Sgd { x, .. } => x,
            OptimizerState::SgdMomentum { x, .. } => x,
        }
    }

    /// Point whose distance to the solution is guaranteed monotone: the
    /// averaging iterate `z` for IAM, the iterate itself otherwise.
    pub fn monotone_point(&self) -> &ParamVector {
        match self {
            OptimizerState::Iam(state) => &state.z,
            other => other.x(),
        }
    }

    pub fn step(&mut self, problem: &dyn Problem, batch: &BatchSample) -> Result<f64> {
        match self {
            OptimizerState::Sps { x, config } => sps_step(x, problem, batch, config),
            OptimizerState::Iam(state) => state.step(problem, batch),
            OptimizerState::Sgd { x, schedule, t } => {
                let (_, grad) = problem.eval(batch, x)?;
                let gamma = schedule.stepsize(*t);
                sgd_step(x, &grad, gamma);
                *t += 1;
                finite_or_error(x, "iterate after sgd step")?;
                Ok(gamma)
            }
            OptimizerState::SgdMomentum {
                x,
                inner,
                gamma,
                beta,
            } => {
                let (_, grad) = problem.eval(batch, x)?;
                inner.step(x, &grad, *gamma, *beta);
                finite_or_error(x, "iterate after sgd-m step")?;
                Ok(*gamma)
            }
        }
    }
}
