//! Closed-form convergence bounds built from problem constants. Each
//! certificate is a function of the iteration count, valid beyond a
//! per-kind threshold.

use crate::problems::ProblemConstants;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// Averaged-iterate gap bound `G D / sqrt(T)` for Lipschitz-style noise.
    NonsmoothAvg,
    /// Averaged-iterate gap bound `2 L D^2 / T + sqrt(2 L delta*) D / sqrt(T)`.
    SmoothAvg,
    /// Variant via gradient noise: `4 L D^2 / T + sqrt(2) D sigma* / sqrt(T)`.
    SmoothAvgSigma,
    /// Last-iterate gap bound `G D / sqrt(T + 1)` for the averaging scheme.
    IamNonsmoothLast,
    /// Last-iterate bound `2 L D^2 (ln T + 1) / T + sqrt(2 L delta*) D / sqrt(T)`.
    IamSmoothLast,
    /// Squared-distance bound `(16 B / mu^2) / (t + 1 - T0)` under quadratic
    /// growth, valid past a warmup window.
    StrongConvexDist,
}

#[derive(Debug, Clone)]
pub struct RateCertificate {
    pub kind: CertificateKind,
    params: Params,
    /// First iteration count at which the bound applies.
    pub valid_from: f64,
    /// Set when the constants are ball estimates rather than exact values;
    /// such a bound is advisory.
    pub advisory: bool,
}

#[derive(Debug, Clone)]
enum Params {
    Nonsmooth { g: f64, d: f64 },
    Smooth { l: f64, delta: f64, d: f64 },
    SmoothSigma { l: f64, sigma_sq: f64, d: f64 },
    StrongConvex { a: f64, b: f64, mu: f64, t0: f64 },
}

fn require(opt: Option<f64>, name: &'static str) -> Result<f64> {
    opt.ok_or(Error::MissingConstant(name))
}

/// Builds the certificate of the requested kind, or an error naming the
/// first missing constant.
pub fn certificate(kind: CertificateKind, constants: &ProblemConstants) -> Result<RateCertificate> {
    let d = constants.d_init;
    let params = match kind {
        CertificateKind::NonsmoothAvg | CertificateKind::IamNonsmoothLast => Params::Nonsmooth {
            g: require(constants.g_sq, "g_sq")?.sqrt(),
            d,
        },
        CertificateKind::SmoothAvg | CertificateKind::IamSmoothLast => Params::Smooth {
            l: require(constants.l_smooth, "l_smooth")?,
            delta: require(constants.delta_star, "delta_star")?,
            d,
        },
        CertificateKind::SmoothAvgSigma => Params::SmoothSigma {
            l: require(constants.l_smooth, "l_smooth")?,
            sigma_sq: require(constants.sigma_star_sq, "sigma_star_sq")?,
            d,
        },
        CertificateKind::StrongConvexDist => {
            let mu = require(constants.mu, "mu")?;
            if mu <= 0.0 {
                return Err(Error::Degenerate("quadratic growth constant is zero".into()));
            }
            // Smooth route when available, otherwise the Lipschitz route.
            let (a, b) = if let (Some(l), Some(delta)) = (constants.l_smooth, constants.delta_star)
            {
                (2.0 * l, 2.0 * l * delta)
            } else {
                (0.0, require(constants.g_sq, "g_sq")?)
            };
            if b <= 0.0 {
                return Err(Error::Degenerate(
                    "strongly convex certificate needs a positive noise constant".into(),
                ));
            }
            let log_term = (d * d * mu * mu / (16.0 * b)).ln();
            let t0 = 4.0 * a / mu * log_term;
            Params::StrongConvex { a, b, mu, t0 }
        }
    };
    let valid_from = match &params {
        Params::StrongConvex { a, b, mu, .. } => {
            let log_term = (d * d * mu * mu / (16.0 * b)).ln();
            (2.0 * a / mu * (2.0 * log_term + 1.0)).max(0.0)
        }
        _ => 1.0,
    };
    Ok(RateCertificate {
        kind,
        params,
        valid_from,
        advisory: constants.empirical,
    })
}

impl RateCertificate {
    /// Bound value at iteration count `t` (only meaningful for
    /// `t >= valid_from`).
    pub fn bound(&self, t: f64) -> f64 {
        match &self.params {
            Params::Nonsmooth { g, d } => match self.kind {
                CertificateKind::IamNonsmoothLast => g * d / (t + 1.0).sqrt(),
                _ => g * d / t.sqrt(),
            },
            Params::Smooth { l, delta, d } => {
                let leading = match self.kind {
                    CertificateKind::IamSmoothLast => 2.0 * l * d * d * (t.ln() + 1.0) / t,
                    _ => 2.0 * l * d * d / t,
                };
                leading + (2.0 * l * delta).sqrt() * d / t.sqrt()
            }
            Params::SmoothSigma { l, sigma_sq, d } => {
                4.0 * l * d * d / t + 2f64.sqrt() * d * sigma_sq.sqrt() / t.sqrt()
            }
            Params::StrongConvex { b, mu, t0, .. } => 16.0 * b / (mu * mu) / (t + 1.0 - t0),
        }
    }
}
