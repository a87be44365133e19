use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MlError;

const NEWTON_TOLERANCE: f64 = 1e-8;
const NEWTON_MAX_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpcBounds {
    pub amplitude: (f64, f64),
    pub length_scale: (f64, f64),
}

impl Default for GpcBounds {
    fn default() -> Self {
        GpcBounds { amplitude: (1e-3, 1e3), length_scale: (1e-2, 1e2) }
    }
}

impl GpcBounds {
    fn validate(&self) -> Result<(), MlError> {
        for (lo, hi) in [self.amplitude, self.length_scale] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(MlError::InvalidParameter(format!("bad hyperparameter bounds ({lo}, {hi})")));
            }
        }
        Ok(())
    }

    fn clamp(&self, amplitude: f64, length: f64) -> (f64, f64) {
        (amplitude.clamp(self.amplitude.0, self.amplitude.1), length.clamp(self.length_scale.0, self.length_scale.1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpcOptions {
    pub bounds: GpcBounds,
    pub initial_amplitude: f64,
    pub initial_length_scale: f64,
    /// When false the initial hyperparameters are used as given.
    pub optimize: bool,
    /// Points per axis of the log-spaced starting grid.
    pub grid_points: usize,
    pub max_refine_iters: u64,
}

impl Default for GpcOptions {
    fn default() -> Self {
        GpcOptions {
            bounds: GpcBounds::default(),
            initial_amplitude: 1.0,
            initial_length_scale: 1.0,
            optimize: true,
            grid_points: 7,
            max_refine_iters: 300,
        }
    }
}

/// Quantities of the Laplace approximation at the posterior mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacePosterior {
    pub f_hat: DVector<f64>,
    /// ∇ log p(y|f) at the mode.
    pub grad_log_lik: DVector<f64>,
    pub sqrt_w: DVector<f64>,
    /// Lower Cholesky factor of I + W½ K W½.
    pub chol_b: DMatrix<f64>,
    pub log_marginal_likelihood: f64,
    pub newton_steps: usize,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpcModel {
    pub amplitude: f64,
    pub length_scale: f64,
    pub bounds: GpcBounds,
    pub x_train: DMatrix<f64>,
    /// ±1
    pub y_train: Vec<f64>,
    pub posterior: LaplacePosterior,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log σ(z) without overflow.
fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

fn sq_dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    (0..a.ncols()).map(|k| (a[(i, k)] - b[(j, k)]).powi(2)).sum()
}

pub(crate) fn kernel_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>, amplitude: f64, length: f64) -> DMatrix<f64> {
    let cols: Vec<Vec<f64>> = (0..b.nrows())
        .into_par_iter()
        .map(|j| (0..a.nrows()).map(|i| amplitude * (-sq_dist(a, i, b, j) / (2.0 * length * length)).exp()).collect())
        .collect();
    DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| cols[j][i])
}

/// Posterior mode by Newton's method in the numerically stable B-form.
fn laplace_mode(k: &DMatrix<f64>, y: &[f64]) -> Result<LaplacePosterior, MlError> {
    let n = y.len();
    let t = DVector::from_iterator(n, y.iter().map(|&v| (v + 1.0) / 2.0));
    let mut f = DVector::zeros(n);
    let psi = |f: &DVector<f64>, a: &DVector<f64>| -> f64 {
        -0.5 * a.dot(f) + f.iter().zip(y).map(|(&fi, &yi)| log_sigmoid(yi * fi)).sum::<f64>()
    };
    let mut a = DVector::zeros(n);
    let mut obj = psi(&f, &a);
    for step in 0..NEWTON_MAX_STEPS {
        let pi = f.map(sigmoid);
        let grad = &t - &pi;
        let gnorm = (&grad - &a).norm();
        if gnorm < NEWTON_TOLERANCE {
            return finish(k, y, f, a, step, gnorm);
        }
        let w = pi.map(|p| p * (1.0 - p));
        let sw = w.map(f64::sqrt);
        let b_mat = DMatrix::identity(n, n) + DMatrix::from_diagonal(&sw) * k * DMatrix::from_diagonal(&sw);
        let chol = Cholesky::new(b_mat).ok_or_else(|| MlError::Numerical("B matrix not positive definite".into()))?;
        let b = w.component_mul(&f) + &grad;
        let rhs = sw.component_mul(&(k * &b));
        let a_new = &b - sw.component_mul(&chol.solve(&rhs));
        let da = &a_new - &a;
        // Step halving keeps the objective non-decreasing.
        let mut scale = 1.0;
        loop {
            let a_try = &a + &da * scale;
            let f_try = k * &a_try;
            let o = psi(&f_try, &a_try);
            if o >= obj - 1e-14 * obj.abs().max(1.0) || scale < 1e-10 {
                a = a_try;
                f = f_try;
                obj = o;
                break;
            }
            scale *= 0.5;
        }
    }
    let grad = &t - f.map(sigmoid);
    let gnorm = (&grad - &a).norm();
    if gnorm < NEWTON_TOLERANCE {
        return finish(k, y, f, a, NEWTON_MAX_STEPS, gnorm);
    }
    Err(MlError::Numerical(format!("Laplace Newton iteration did not converge (gradient norm {gnorm:e})")))
}

fn finish(k: &DMatrix<f64>, y: &[f64], f: DVector<f64>, a: DVector<f64>, steps: usize, gnorm: f64) -> Result<LaplacePosterior, MlError> {
    let n = y.len();
    let pi = f.map(sigmoid);
    let t = DVector::from_iterator(n, y.iter().map(|&v| (v + 1.0) / 2.0));
    let sw = pi.map(|p| (p * (1.0 - p)).sqrt());
    let b_mat = DMatrix::identity(n, n) + DMatrix::from_diagonal(&sw) * k * DMatrix::from_diagonal(&sw);
    let chol = Cholesky::new(b_mat).ok_or_else(|| MlError::Numerical("B matrix not positive definite".into()))?;
    let l = chol.l();
    let log_det_half: f64 = l.diagonal().iter().map(|v| v.ln()).sum();
    let log_lik: f64 = f.iter().zip(y).map(|(&fi, &yi)| log_sigmoid(yi * fi)).sum();
    Ok(LaplacePosterior {
        log_marginal_likelihood: -0.5 * a.dot(&f) + log_lik - log_det_half,
        grad_log_lik: t - pi,
        f_hat: f,
        sqrt_w: sw,
        chol_b: l,
        newton_steps: steps,
        gradient_norm: gnorm,
    })
}

struct NegLogEvidence<'a> {
    x: &'a DMatrix<f64>,
    y: &'a [f64],
    bounds: GpcBounds,
}

impl NegLogEvidence<'_> {
    fn at(&self, log_amp: f64, log_len: f64) -> f64 {
        let (amp, len) = self.bounds.clamp(log_amp.exp(), log_len.exp());
        let k = kernel_matrix(self.x, self.x, amp, len);
        match laplace_mode(&k, self.y) {
            Ok(p) => -p.log_marginal_likelihood,
            Err(_) => f64::INFINITY,
        }
    }
}

impl CostFunction for NegLogEvidence<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, argmin::core::Error> {
        Ok(self.at(p[0], p[1]))
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    if n < 2 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

impl GpcModel {
    /// Trains on rows of `x` with boolean labels (true is the positive class).
    pub fn fit(x: &DMatrix<f64>, labels: &[bool], opts: &GpcOptions) -> Result<Self, MlError> {
        if x.nrows() == 0 {
            return Err(MlError::Empty);
        }
        if labels.len() != x.nrows() {
            return Err(MlError::DimensionMismatch { expected: x.nrows(), got: labels.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(MlError::InvalidParameter("non-finite training input".into()));
        }
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            return Err(MlError::SingleClass);
        }
        opts.bounds.validate()?;
        let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
        let (mut amp, mut len) = opts.bounds.clamp(opts.initial_amplitude, opts.initial_length_scale);
        if opts.optimize {
            let problem = NegLogEvidence { x, y: &y, bounds: opts.bounds };
            let mut best = (problem.at(amp.ln(), len.ln()), amp.ln(), len.ln());
            for la in log_grid(opts.bounds.amplitude.0, opts.bounds.amplitude.1, opts.grid_points) {
                for ll in log_grid(opts.bounds.length_scale.0, opts.bounds.length_scale.1, opts.grid_points) {
                    let c = problem.at(la, ll);
                    if c < best.0 {
                        best = (c, la, ll);
                    }
                }
            }
            if !best.0.is_finite() {
                return Err(MlError::Numerical("no hyperparameters give a finite evidence".into()));
            }
            let (_, la, ll) = best;
            let simplex = vec![vec![la, ll], vec![la + 0.5, ll], vec![la, ll + 0.5]];
            let solver = NelderMead::new(simplex)
                .with_sd_tolerance(1e-10)
                .map_err(|e| MlError::Numerical(e.to_string()))?;
            let res = Executor::new(problem, solver)
                .configure(|s| s.max_iters(opts.max_refine_iters))
                .run()
                .map_err(|e| MlError::Numerical(e.to_string()))?;
            let refined = res.state.best_param.clone().unwrap_or(vec![la, ll]);
            let c = res.state.best_cost;
            let (pa, pl) = if c <= best.0 { (refined[0], refined[1]) } else { (la, ll) };
            (amp, len) = opts.bounds.clamp(pa.exp(), pl.exp());
        }
        let k = kernel_matrix(x, x, amp, len);
        let posterior = laplace_mode(&k, &y)?;
        Ok(GpcModel { amplitude: amp, length_scale: len, bounds: opts.bounds, x_train: x.clone(), y_train: y, posterior })
    }

    /// Latent predictive mean and variance for every row of `x`.
    pub fn latent(&self, x: &DMatrix<f64>) -> Result<Vec<(f64, f64)>, MlError> {
        if x.ncols() != self.x_train.ncols() {
            return Err(MlError::DimensionMismatch { expected: self.x_train.ncols(), got: x.ncols() });
        }
        let ks = kernel_matrix(&self.x_train, x, self.amplitude, self.length_scale);
        let p = &self.posterior;
        let mean = ks.transpose() * &p.grad_log_lik;
        let v = p
            .chol_b
            .solve_lower_triangular(&(DMatrix::from_diagonal(&p.sqrt_w) * &ks))
            .ok_or_else(|| MlError::Numerical("singular Cholesky factor".into()))?;
        Ok((0..x.nrows())
            .map(|j| {
                let var = (self.amplitude - v.column(j).norm_squared()).max(0.0);
                (mean[j], var)
            })
            .collect())
    }

    /// Probability of the positive class, averaged over the latent posterior.
    pub fn predict_proba(&self, x: &DMatrix<f64>) -> Result<Vec<f64>, MlError> {
        Ok(self
            .latent(x)?
            .into_iter()
            .map(|(m, var)| expected_sigmoid(m, var).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
            .collect())
    }
}

/// E[σ(f)] for f ~ N(mean, var), by the trapezoid rule in the standardized
/// variable. The integrand is analytic with poles π/s off the real axis, so
/// a step of 0.25/max(1, s) keeps the discretization error near e⁻⁷⁹ for
/// every s, including wide posteriors where σ is nearly a step.
pub fn expected_sigmoid(mean: f64, var: f64) -> f64 {
    let s = var.max(0.0).sqrt();
    if s == 0.0 {
        return sigmoid(mean);
    }
    let h = 0.25 / s.max(1.0);
    let half = (10.0 / h).ceil() as i64;
    let norm = h / (2.0 * std::f64::consts::PI).sqrt();
    (-half..=half)
        .map(|q| {
            let z = q as f64 * h;
            (-0.5 * z * z).exp() * sigmoid(mean + s * z)
        })
        .sum::<f64>()
        * norm
}
