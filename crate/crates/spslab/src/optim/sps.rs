//! Stochastic Polyak step sizes: the idealized rule and its clipped and
//! dampened safeguards.

use super::finite_or_error;
use crate::problems::{OptLossMode, Problem};
use crate::rng::BatchSample;
use crate::{ParamVector, Result};

/// Safeguard applied on top of the raw Polyak ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpsVariant {
    /// Raw ratio, no safeguard.
    Star,
    /// Clip at `gamma_b`.
    Max { gamma_b: f64 },
    /// Add `epsilon` to the squared gradient norm in the denominator.
    Damp { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpsConfig {
    pub variant: SpsVariant,
    pub opt_loss: OptLossMode,
}

impl SpsConfig {
    pub fn star(opt_loss: OptLossMode) -> Self {
        SpsConfig {
            variant: SpsVariant::Star,
            opt_loss,
        }
    }
}

/// Raw Polyak ratio `(loss - opt_loss)_+ / grad_norm_sq`, with the
/// convention that a zero gradient takes no step.
pub fn polyak_stepsize(loss: f64, opt_loss: f64, grad_norm_sq: f64) -> f64 {
    assert!(grad_norm_sq >= 0.0, "squared gradient norm must be >= 0");
    if grad_norm_sq == 0.0 {
        return 0.0;
    }
    (loss - opt_loss).max(0.0) / grad_norm_sq
}

/// Step size under the given safeguard.
pub fn sps_stepsize(loss: f64, opt_loss: f64, grad_norm_sq: f64, variant: SpsVariant) -> f64 {
    match variant {
        SpsVariant::Star => polyak_stepsize(loss, opt_loss, grad_norm_sq),
        SpsVariant::Max { gamma_b } => {
            assert!(gamma_b > 0.0, "clip level must be positive");
            polyak_stepsize(loss, opt_loss, grad_norm_sq).min(gamma_b)
        }
        SpsVariant::Damp { epsilon } => {
            assert!(epsilon >= 0.0, "dampening must be >= 0");
            let denom = grad_norm_sq + epsilon;
            if denom == 0.0 {
                0.0
            } else {
                (loss - opt_loss).max(0.0) / denom
            }
        }
    }
}

/// One update `x <- x - gamma g`; returns the step size taken.
pub fn sps_step(
    x: &mut ParamVector,
    problem: &dyn Problem,
    batch: &BatchSample,
    config: &SpsConfig,
) -> Result<f64> {
    let (loss, grad) = problem.eval(batch, x)?;
    let opt = problem.opt_loss(batch, config.opt_loss)?;
    let gamma = sps_stepsize(loss, opt, grad.norm_squared(), config.variant);
    x.axpy(-gamma, &grad, 1.0);
    finite_or_error(x, "iterate after sps step")?;
    Ok(gamma)
}
