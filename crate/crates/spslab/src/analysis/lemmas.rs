//! Numeric oracles for the inequalities the convergence analysis rests on.
//! These are proven statements; a failing oracle means an implementation bug.

use crate::problems::Problem;
use crate::rng::RandomSource;
use crate::ParamVector;

const SLACK: f64 = 1e-12;

/// Sum-form Cauchy-Schwarz ("Titu") inequality with positive parts:
/// `sum (a_t)_+^2 / b_t >= (sum a_t)_+^2 / sum b_t` for positive `b`.
pub fn titu_oracle(a: &[f64], b: &[f64]) -> bool {
    assert_eq!(a.len(), b.len(), "a and b must be equally sized");
    assert!(!a.is_empty(), "need at least one term");
    assert!(b.iter().all(|x| *x > 0.0), "b must be positive");
    let lhs: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let p = x.max(0.0);
            p * p / y
        })
        .sum();
    let total = a.iter().sum::<f64>().max(0.0);
    let rhs = total * total / b.iter().sum::<f64>();
    lhs >= rhs - SLACK
}

/// Partial-sum inequality behind AdaGrad-type bounds: for nonnegative `c`
/// with `c_0 > 0` and `S_t = sum_{k<=t} c_k`, it holds that
/// `sqrt(S_t) <= sum_{k<=t} c_k / sqrt(S_k)` for every `t`.
pub fn adagrad_oracle(c: &[f64]) -> bool {
    assert!(!c.is_empty(), "need at least one term");
    assert!(c[0] > 0.0, "c_0 must be positive");
    assert!(c.iter().all(|x| *x >= 0.0), "c must be nonnegative");
    let mut partial = 0.0;
    let mut weighted = 0.0;
    for &ck in c {
        partial += ck;
        weighted += ck / partial.sqrt();
        if partial.sqrt() > weighted + SLACK {
            return false;
        }
    }
    true
}

/// The positive-part ratio `phi(x, y) = (x)_+^2 / y` on `y > 0`.
pub fn positive_part_ratio(x: f64, y: f64) -> f64 {
    assert!(y > 0.0, "defined for y > 0");
    let p = x.max(0.0);
    p * p / y
}

/// Midpoint convexity of `phi` on random probes in `y > 0`.
pub fn perspective_convexity_probe(rng: &mut RandomSource, trials: usize) -> bool {
    for _ in 0..trials {
        let x1 = rng.uniform_range(-5.0, 5.0);
        let x2 = rng.uniform_range(-5.0, 5.0);
        let y1 = rng.uniform_range(1e-3, 5.0);
        let y2 = rng.uniform_range(1e-3, 5.0);
        let mid = positive_part_ratio(0.5 * (x1 + x2), 0.5 * (y1 + y2));
        let chord = 0.5 * positive_part_ratio(x1, y1) + 0.5 * positive_part_ratio(x2, y2);
        if mid > chord + SLACK {
            return false;
        }
    }
    true
}

/// Bregman divergence of the full objective:
/// `f(x) - f(y) - <grad f(y), x - y>`; nonnegative for convex problems.
pub fn bregman(problem: &dyn Problem, x: &ParamVector, y: &ParamVector) -> f64 {
    assert_eq!(x.len(), y.len(), "dimension mismatch");
    let grad_y = problem.full_grad(y);
    problem.full_loss(x) - problem.full_loss(y) - grad_y.dot(&(x - y))
}
