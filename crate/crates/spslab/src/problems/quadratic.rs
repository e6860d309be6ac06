//! Random quadratic finite sums with per-component curvature, centers and
//! nonnegative offsets. Exact solutions and rate constants are available by
//! solving one linear system and a handful of symmetric eigenproblems.

use nalgebra::DMatrix;

use super::{Problem, ProblemConstants};
use crate::rng::make_rng;
use crate::{Error, ParamVector, Result};

/// Finite sum of components `f_i(x) = (x - c_i)' H_i (x - c_i) + o_i` with
/// symmetric PSD `H_i` and offsets `o_i >= 0`.
#[derive(Debug, Clone)]
pub struct QuadraticFiniteSum {
    hessians: Vec<DMatrix<f64>>,
    centers: Vec<ParamVector>,
    offsets: Vec<f64>,
    dim: usize,
    solution: Option<Solved>,
}

#[derive(Debug, Clone)]
struct Solved {
    x_star: ParamVector,
    f_star: f64,
    component_opt: Vec<f64>,
}

impl QuadraticFiniteSum {
    /// Builds an instance from explicit curvature matrices.
    pub fn from_hessians(
        hessians: Vec<DMatrix<f64>>,
        centers: Vec<ParamVector>,
        offsets: Vec<f64>,
    ) -> Result<Self> {
        if hessians.is_empty() || hessians.len() != centers.len() || centers.len() != offsets.len()
        {
            return Err(Error::Invalid(
                "quadratic: hessians, centers and offsets must be equally sized and nonempty"
                    .into(),
            ));
        }
        let dim = centers[0].len();
        for (h, c) in hessians.iter().zip(&centers) {
            if h.nrows() != dim || h.ncols() != dim || c.len() != dim {
                return Err(Error::Invalid("quadratic: dimension mismatch".into()));
            }
        }
        if offsets.iter().any(|o| *o < 0.0) {
            return Err(Error::Invalid("quadratic: offsets must be >= 0".into()));
        }
        Ok(QuadraticFiniteSum {
            hessians,
            centers,
            offsets,
            dim,
            solution: None,
        })
    }

    /// Random instance: factor entries standard normal with
    /// `H_i = A_i' A_i / (3 d)`, `A_i` of shape `3d x d`; a shared center for
    /// the interpolated case, otherwise centers perturbed by `0.05` times a
    /// standard normal; offsets uniform with mean `0.5` and standard
    /// deviation `nu`, truncated at zero.
    pub fn generate(n: usize, d: usize, interpolated: bool, nu: f64, seed: u64) -> Self {
        assert!(n >= 1 && d >= 1, "n and d must be positive");
        assert!(nu >= 0.0, "nu must be >= 0");
        let root = make_rng(seed);
        let mut r_center = root.split("center");
        let mut r_factors = root.split("factors");
        let mut r_perturb = root.split("perturb");
        let mut r_offsets = root.split("offsets");

        let shared = r_center.normal_vector(d);
        let half_width = 3f64.sqrt() * nu;
        let mut hessians = Vec::with_capacity(n);
        let mut centers = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        for _ in 0..n {
            let factor = DMatrix::from_fn(3 * d, d, |_, _| r_factors.standard_normal());
            hessians.push(factor.transpose() * &factor / (3.0 * d as f64));
            let center = if interpolated {
                shared.clone()
            } else {
                &shared + 0.05 * r_perturb.normal_vector(d)
            };
            centers.push(center);
            let raw = r_offsets.uniform_range(0.5 - half_width, 0.5 + half_width);
            offsets.push(raw.max(0.0));
        }
        QuadraticFiniteSum {
            hessians,
            centers,
            offsets,
            dim: d,
            solution: None,
        }
    }

    /// Solves the normal equations `Hbar x = mean(H_i c_i)` and caches the
    /// minimizer, its value and the component losses there.
    pub fn solve(&mut self) -> Result<(ParamVector, f64)> {
        if self.solution.is_none() {
            let n = self.hessians.len() as f64;
            let mut hbar = DMatrix::zeros(self.dim, self.dim);
            let mut rhs = ParamVector::zeros(self.dim);
            for (h, c) in self.hessians.iter().zip(&self.centers) {
                hbar += h;
                rhs += h * c;
            }
            hbar /= n;
            rhs /= n;
            let chol = hbar
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Degenerate("mean curvature matrix is singular".into()))?;
            let x_star = chol.solve(&rhs);
            let component_opt: Vec<f64> = (0..self.hessians.len())
                .map(|i| self.component_loss(i, &x_star))
                .collect();
            let f_star = component_opt.iter().sum::<f64>() / n;
            self.solution = Some(Solved {
                x_star,
                f_star,
                component_opt,
            });
        }
        let s = self.solution.as_ref().unwrap();
        Ok((s.x_star.clone(), s.f_star))
    }

    pub fn mean_hessian(&self) -> DMatrix<f64> {
        let n = self.hessians.len() as f64;
        let mut hbar = DMatrix::zeros(self.dim, self.dim);
        for h in &self.hessians {
            hbar += h;
        }
        hbar / n
    }

    /// Largest per-component smoothness constant `max_i 2 lambda_max(H_i)`.
    pub fn l_max(&self) -> f64 {
        self.hessians
            .iter()
            .map(|h| 2.0 * spectral_bounds(h).1)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn centers(&self) -> &[ParamVector] {
        &self.centers
    }
}

/// `(lambda_min, lambda_max)` of a symmetric matrix.
fn spectral_bounds(h: &DMatrix<f64>) -> (f64, f64) {
    let eig = h.clone().symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

impl Problem for QuadraticFiniteSum {
    fn dim(&self) -> usize {
        self.dim
    }

    fn n_components(&self) -> usize {
        self.hessians.len()
    }

    fn component(&self, i: usize, x: &ParamVector, grad: &mut ParamVector) -> f64 {
        let delta = x - &self.centers[i];
        let hd = &self.hessians[i] * &delta;
        grad.copy_from(&hd);
        *grad *= 2.0;
        delta.dot(&hd) + self.offsets[i]
    }

    fn component_loss(&self, i: usize, x: &ParamVector) -> f64 {
        let delta = x - &self.centers[i];
        delta.dot(&(&self.hessians[i] * &delta)) + self.offsets[i]
    }

    fn solution(&self) -> Option<(&ParamVector, f64)> {
        self.solution.as_ref().map(|s| (&s.x_star, s.f_star))
    }

    fn component_opt_loss(&self, i: usize) -> Option<f64> {
        self.solution.as_ref().map(|s| s.component_opt[i])
    }

    fn constants(&self, x0: &ParamVector) -> ProblemConstants {
        let mut c = ProblemConstants {
            l_smooth: Some(self.l_max()),
            mu: Some(2.0 * spectral_bounds(&self.mean_hessian()).0),
            ..ProblemConstants::default()
        };
        if let Some(s) = &self.solution {
            let n = self.hessians.len() as f64;
            c.d_init = (x0 - &s.x_star).norm();
            c.delta_star = Some((s.f_star - self.offsets.iter().sum::<f64>() / n).max(0.0));
            let mut grad = ParamVector::zeros(self.dim);
            let sigma = (0..self.hessians.len())
                .map(|i| {
                    self.component(i, &s.x_star, &mut grad);
                    grad.norm_squared()
                })
                .sum::<f64>()
                / n;
            c.sigma_star_sq = Some(sigma);
            c.x_star = Some(s.x_star.clone());
            c.f_star = Some(s.f_star);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::OptLossMode;
    use crate::rng::{sample_batch, BatchSample};
    use crate::testutil;
    use approx::assert_relative_eq;

    #[test]
    fn interpolated_centers_identical() {
        let p = QuadraticFiniteSum::generate(8, 5, true, 0.1, 0);
        for c in p.centers() {
            assert_eq!(c, &p.centers()[0]);
        }
    }

    #[test]
    fn zero_spread_offsets_are_half() {
        let p = QuadraticFiniteSum::generate(8, 5, false, 0.0, 0);
        for &o in p.offsets() {
            assert_eq!(o, 0.5);
        }
    }

    #[test]
    fn generation_is_bit_reproducible() {
        let mut a = QuadraticFiniteSum::generate(50, 10, false, 0.1, 42);
        let mut b = QuadraticFiniteSum::generate(50, 10, false, 0.1, 42);
        let (xa, fa) = a.solve().unwrap();
        let (xb, fb) = b.solve().unwrap();
        assert_eq!(xa, xb);
        assert_eq!(fa.to_bits(), fb.to_bits());
    }

    #[test]
    fn solution_of_interpolated_is_shared_center() {
        let mut p = QuadraticFiniteSum::generate(12, 6, true, 0.2, 3);
        let (x_star, f_star) = p.solve().unwrap();
        let expect_f = p.offsets().iter().sum::<f64>() / 12.0;
        assert_relative_eq!(x_star, p.centers()[0], epsilon = 1e-9);
        assert_relative_eq!(f_star, expect_f, epsilon = 1e-9);
    }

    #[test]
    fn single_component_solution_is_its_center() {
        let mut p = QuadraticFiniteSum::generate(1, 4, false, 0.1, 5);
        let (x_star, _) = p.solve().unwrap();
        assert_relative_eq!(x_star, p.centers()[0], epsilon = 1e-9);
    }

    #[test]
    fn gradient_vanishes_at_solution() {
        let mut p = QuadraticFiniteSum::generate(20, 8, false, 0.1, 7);
        let (x_star, _) = p.solve().unwrap();
        assert!(p.full_grad(&x_star).norm() <= 1e-8);
    }

    #[test]
    fn singular_mean_curvature_is_reported() {
        // Rank-one curvature shared by both components leaves a null space.
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let mut p = QuadraticFiniteSum::from_hessians(
            vec![h.clone(), h],
            vec![ParamVector::zeros(2), ParamVector::zeros(2)],
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(p.solve(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn component_minimizer_gives_offset_and_zero_grad() {
        let p = QuadraticFiniteSum::generate(6, 4, false, 0.3, 1);
        let mut grad = ParamVector::zeros(4);
        let loss = p.component(2, &p.centers()[2].clone(), &mut grad);
        assert_relative_eq!(loss, p.offsets()[2], epsilon = 1e-12);
        assert!(grad.norm() <= 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = QuadraticFiniteSum::generate(10, 6, false, 0.1, 2);
        testutil::finite_difference_sweep(&p, 100, 11, 1e-5);
    }

    #[test]
    fn batch_convexity_probe() {
        let p = QuadraticFiniteSum::generate(10, 6, false, 0.1, 2);
        testutil::convexity_sweep(&p, 100, 12);
    }

    #[test]
    fn theoretical_opt_loss_matches_brute_force() {
        let mut p = QuadraticFiniteSum::generate(30, 7, false, 0.2, 9);
        let (x_star, _) = p.solve().unwrap();
        let mut rng = make_rng(4);
        for _ in 0..20 {
            let batch = sample_batch(&mut rng, 30, 5).unwrap();
            let direct: f64 = batch
                .indices
                .iter()
                .map(|&i| p.component_loss(i, &x_star))
                .sum::<f64>()
                / 5.0;
            let via = p.opt_loss(&batch, OptLossMode::Theoretical).unwrap();
            assert_relative_eq!(via, direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_mode_and_interp_theoretical() {
        let mut p = QuadraticFiniteSum::generate(10, 5, true, 0.0, 6);
        p.solve().unwrap();
        let batch = BatchSample {
            indices: vec![0, 3, 7],
        };
        assert_eq!(p.opt_loss(&batch, OptLossMode::Zero).unwrap(), 0.0);
        assert_relative_eq!(
            p.opt_loss(&batch, OptLossMode::Theoretical).unwrap(),
            0.5,
            epsilon = 1e-9
        );
    }

    #[test]
    fn theoretical_without_solution_is_config_error() {
        let p = QuadraticFiniteSum::generate(4, 3, false, 0.1, 8);
        let batch = BatchSample::single(0);
        assert!(matches!(
            p.opt_loss(&batch, OptLossMode::Theoretical),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn teacher_mode_needs_a_teacher() {
        let p = QuadraticFiniteSum::generate(4, 3, false, 0.1, 8);
        let batch = BatchSample::single(0);
        assert!(matches!(
            p.opt_loss(&batch, OptLossMode::Teacher),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn constants_interpolated_have_no_noise() {
        let mut p = QuadraticFiniteSum::generate(15, 6, true, 0.2, 10);
        p.solve().unwrap();
        let x0 = make_rng(0).split("x0").normal_vector(6);
        let c = p.constants(&x0);
        assert!(c.delta_star.unwrap() <= 1e-10);
        assert!(c.sigma_star_sq.unwrap() <= 1e-10);
        c.validate().unwrap();
    }

    #[test]
    fn noise_constants_satisfy_transfer_inequality() {
        let mut p = QuadraticFiniteSum::generate(25, 8, false, 0.1, 11);
        p.solve().unwrap();
        let x0 = make_rng(1).split("x0").normal_vector(8);
        let c = p.constants(&x0);
        let (s, l, d) = (
            c.sigma_star_sq.unwrap(),
            c.l_smooth.unwrap(),
            c.delta_star.unwrap(),
        );
        assert!(s <= 2.0 * l * d + 1e-9, "{s} vs {}", 2.0 * l * d);
        c.validate().unwrap();
    }

    #[test]
    fn quadratic_growth_holds_on_probes() {
        let mut p = QuadraticFiniteSum::generate(20, 6, false, 0.1, 13);
        let (x_star, f_star) = p.solve().unwrap();
        let mu = p.constants(&x_star).mu.unwrap();
        assert!(mu > 0.0);
        let mut rng = make_rng(14);
        for _ in 0..100 {
            let x = rng.normal_vector(6) * rng.uniform_range(0.1, 3.0);
            let gap = p.full_loss(&x) - f_star;
            let dist_sq = (&x - &x_star).norm_squared();
            assert!(gap >= 0.5 * mu * dist_sq - 1e-9 * (1.0 + gap.abs()));
        }
    }

    #[test]
    fn component_smoothness_bound_holds() {
        let p = QuadraticFiniteSum::generate(10, 5, false, 0.1, 15);
        let l = p.l_max();
        let mut rng = make_rng(16);
        let mut grad = ParamVector::zeros(5);
        for _ in 0..100 {
            let x = rng.normal_vector(5);
            let y = rng.normal_vector(5);
            let i = rng.index(10);
            let fx = p.component(i, &x, &mut grad);
            let lin = fx + grad.dot(&(&y - &x));
            let fy = p.component_loss(i, &y);
            assert!(fy <= lin + 0.5 * l * (&y - &x).norm_squared() + 1e-9);
        }
    }
}
