//! Linear teacher/student distillation task. The teacher is a ridge
//! least-squares fit over all features; the student sees only a prefix of
//! the feature vector and minimizes squared loss over that prefix. The
//! teacher's batch loss serves as the optimal-loss oracle for the student:
//! being strictly more expressive, the teacher lower-bounds what the student
//! can reach.

use nalgebra::DMatrix;

use super::{Problem, ProblemConstants};
use crate::rng::{make_rng, BatchSample};
use crate::{Error, ParamVector, Result};

pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Down-weighting of the true signal carried by teacher-only features. Keeps
/// the student's attainable loss close to (but strictly above) the teacher's.
const EXTRA_FEATURE_SCALE: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct DistillationTask {
    features: Vec<ParamVector>,
    targets: Vec<f64>,
    teacher_weights: ParamVector,
    student_dim: usize,
    student_solution: (ParamVector, f64),
    component_opt: Vec<f64>,
}

/// Ridge least squares: minimizes mean squared residual plus
/// `ridge * ||w||^2` over the first `dim` feature coordinates.
fn ridge_fit(
    features: &[ParamVector],
    targets: &[f64],
    dim: usize,
    ridge: f64,
) -> Result<ParamVector> {
    let n = features.len() as f64;
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = ParamVector::zeros(dim);
    for (phi, &y) in features.iter().zip(targets) {
        let truncated = phi.rows(0, dim);
        for a in 0..dim {
            for b in 0..dim {
                gram[(a, b)] += truncated[a] * truncated[b];
            }
            rhs[a] += truncated[a] * y;
        }
    }
    gram /= n;
    rhs /= n;
    for j in 0..dim {
        gram[(j, j)] += ridge;
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Degenerate("singular normal equations in teacher fit".into()))?;
    Ok(chol.solve(&rhs))
}

fn mean_squared_loss(features: &[ParamVector], targets: &[f64], w: &ParamVector) -> f64 {
    let dim = w.len();
    features
        .iter()
        .zip(targets)
        .map(|(phi, &y)| {
            let r = phi.rows(0, dim).dot(&w.rows(0, dim)) - y;
            r * r
        })
        .sum::<f64>()
        / features.len() as f64
}

impl DistillationTask {
    /// Synthetic task. Targets come from a planted linear model over all
    /// `d_teacher` features plus Gaussian noise of the given scale; the
    /// planted weights on the teacher-only features are down-scaled so the
    /// student deficit stays mild. Requires `d_student <= d_teacher`.
    pub fn generate(
        n: usize,
        d_teacher: usize,
        d_student: usize,
        noise: f64,
        seed: u64,
    ) -> Result<Self> {
        if d_student > d_teacher {
            return Err(Error::Invalid(format!(
                "student dimension {d_student} exceeds teacher dimension {d_teacher}"
            )));
        }
        if n == 0 || d_student == 0 {
            return Err(Error::Invalid("need data and a nonzero student".into()));
        }
        let root = make_rng(seed);
        let mut r_feat = root.split("features");
        let mut r_true = root.split("weights");
        let mut r_noise = root.split("noise");
        let scale = 1.0 / (d_teacher as f64).sqrt();
        let mut truth = r_true.normal_vector(d_teacher) * scale;
        for j in d_student..d_teacher {
            truth[j] *= EXTRA_FEATURE_SCALE;
        }
        let features: Vec<ParamVector> = (0..n).map(|_| r_feat.normal_vector(d_teacher)).collect();
        let targets: Vec<f64> = features
            .iter()
            .map(|phi| phi.dot(&truth) + noise * r_noise.standard_normal())
            .collect();
        Self::from_data(features, targets, d_student, DEFAULT_RIDGE)
    }

    /// Fits the teacher and the student optimum on given data.
    pub fn from_data(
        features: Vec<ParamVector>,
        targets: Vec<f64>,
        d_student: usize,
        ridge: f64,
    ) -> Result<Self> {
        if features.is_empty() || features.len() != targets.len() {
            return Err(Error::Invalid(
                "distillation: features and targets must be equally sized and nonempty".into(),
            ));
        }
        let d_teacher = features[0].len();
        if d_student > d_teacher || d_student == 0 {
            return Err(Error::Invalid("distillation: bad student dimension".into()));
        }
        let teacher_weights = ridge_fit(&features, &targets, d_teacher, ridge)?;
        let student_weights = ridge_fit(&features, &targets, d_student, ridge)?;
        let student_loss = mean_squared_loss(&features, &targets, &student_weights);
        let component_opt: Vec<f64> = features
            .iter()
            .zip(&targets)
            .map(|(phi, &y)| {
                let r = phi.rows(0, d_student).dot(&student_weights) - y;
                r * r
            })
            .collect();
        Ok(DistillationTask {
            features,
            targets,
            teacher_weights,
            student_dim: d_student,
            student_solution: (student_weights, student_loss),
            component_opt,
        })
    }

    pub fn teacher_weights(&self) -> &ParamVector {
        &self.teacher_weights
    }

    /// Teacher mean squared loss over the whole dataset.
    pub fn teacher_full_loss(&self) -> f64 {
        mean_squared_loss(&self.features, &self.targets, &self.teacher_weights)
    }

    /// Closed-form student optimum loss over the whole dataset.
    pub fn student_optimum_loss(&self) -> f64 {
        self.student_solution.1
    }
}

impl Problem for DistillationTask {
    fn dim(&self) -> usize {
        self.student_dim
    }

    fn n_components(&self) -> usize {
        self.features.len()
    }

    fn component(&self, i: usize, x: &ParamVector, grad: &mut ParamVector) -> f64 {
        let truncated = self.features[i].rows(0, self.student_dim);
        let r = truncated.dot(x) - self.targets[i];
        grad.copy_from(&truncated);
        *grad *= 2.0 * r;
        r * r
    }

    fn component_loss(&self, i: usize, x: &ParamVector) -> f64 {
        let r = self.features[i].rows(0, self.student_dim).dot(x) - self.targets[i];
        r * r
    }

    fn solution(&self) -> Option<(&ParamVector, f64)> {
        Some((&self.student_solution.0, self.student_solution.1))
    }

    fn component_opt_loss(&self, i: usize) -> Option<f64> {
        Some(self.component_opt[i])
    }

    fn teacher_batch_loss(&self, batch: &BatchSample) -> Option<f64> {
        let mut sum = 0.0;
        for &i in &batch.indices {
            let r = self.features[i].dot(&self.teacher_weights) - self.targets[i];
            sum += r * r;
        }
        Some(sum / batch.batch_size() as f64)
    }

    fn constants(&self, x0: &ParamVector) -> ProblemConstants {
        let n = self.features.len() as f64;
        let ds = self.student_dim;
        let (x_star, f_star) = &self.student_solution;
        let mut gram = DMatrix::<f64>::zeros(ds, ds);
        let mut l_max = 0f64;
        for phi in &self.features {
            let truncated = phi.rows(0, ds);
            l_max = l_max.max(2.0 * truncated.norm_squared());
            gram.ger(2.0 / n, &truncated.clone_owned(), &truncated.clone_owned(), 1.0);
        }
        let mu = gram
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        let sigma = self
            .features
            .iter()
            .zip(&self.targets)
            .map(|(phi, &y)| {
                let truncated = phi.rows(0, ds);
                let r = truncated.dot(x_star) - y;
                4.0 * r * r * truncated.norm_squared()
            })
            .sum::<f64>()
            / n;
        ProblemConstants {
            d_init: (x0 - x_star).norm(),
            g_sq: None,
            l_smooth: Some(l_max),
            mu: Some(mu),
            // Each squared residual attains zero, so the mean component
            // optimum is zero and the function noise equals the optimum loss.
            delta_star: Some(*f_star),
            sigma_star_sq: Some(sigma),
            x_star: Some(x_star.clone()),
            f_star: Some(*f_star),
            empirical: false,
        }
    }
}
