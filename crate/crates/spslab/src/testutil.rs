//! Shared oracles for unit tests: finite-difference gradients and convexity
//! probes, independent of the analytic implementations they check.

use crate::problems::Problem;
use crate::rng::{make_rng, sample_batch, BatchSample};
use crate::ParamVector;

/// Central finite-difference gradient of the batch loss.
pub fn fd_batch_grad(problem: &dyn Problem, batch: &BatchSample, x: &ParamVector) -> ParamVector {
    let h = 1e-6 * (1.0 + x.norm());
    let mut grad = ParamVector::zeros(x.len());
    let batch_loss = |p: &ParamVector| -> f64 {
        batch
            .indices
            .iter()
            .map(|&i| problem.component_loss(i, p))
            .sum::<f64>()
            / batch.batch_size() as f64
    };
    for j in 0..x.len() {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus[j] += h;
        minus[j] -= h;
        grad[j] = (batch_loss(&plus) - batch_loss(&minus)) / (2.0 * h);
    }
    grad
}

/// Checks analytic against finite-difference gradients on random pairs.
pub fn finite_difference_sweep(problem: &dyn Problem, trials: usize, seed: u64, rel_tol: f64) {
    let mut rng = make_rng(seed);
    let n = problem.n_components();
    for trial in 0..trials {
        let x = rng.normal_vector(problem.dim());
        let size = 1 + rng.index(n.min(4));
        let batch = sample_batch(&mut rng, n, size).unwrap();
        let (_, analytic) = problem.eval(&batch, &x).unwrap();
        let fd = fd_batch_grad(problem, &batch, &x);
        let err = (&analytic - &fd).norm();
        let scale = analytic.norm().max(1.0);
        assert!(
            err <= rel_tol * scale,
            "trial {trial}: fd mismatch {err:.3e} vs scale {scale:.3e}"
        );
    }
}

/// Midpoint convexity of the batch loss on random pairs.
pub fn convexity_sweep(problem: &dyn Problem, trials: usize, seed: u64) {
    let mut rng = make_rng(seed);
    let n = problem.n_components();
    for _ in 0..trials {
        let x = rng.normal_vector(problem.dim());
        let y = rng.normal_vector(problem.dim());
        let size = 1 + rng.index(n.min(4));
        let batch = sample_batch(&mut rng, n, size).unwrap();
        let loss = |p: &ParamVector| -> f64 {
            batch
                .indices
                .iter()
                .map(|&i| problem.component_loss(i, p))
                .sum::<f64>()
                / batch.batch_size() as f64
        };
        let mid = (&x + &y) * 0.5;
        assert!(loss(&mid) <= 0.5 * loss(&x) + 0.5 * loss(&y) + 1e-10);
    }
}
