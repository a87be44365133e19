use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MlError;
use crate::chem::{tanimoto, Fingerprint};

const ENTROPY_TOLERANCE: f64 = 1e-10;
const MAX_BISECTION_STEPS: usize = 500;
const MACHINE_EPSILON: f64 = f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsneOptions {
    pub perplexity: f64,
    pub dims: usize,
    pub iterations: usize,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
    /// `None` picks max(n / exaggeration / 4, 50).
    pub learning_rate: Option<f64>,
    pub min_gain: f64,
    /// Stop once the gradient norm falls below this.
    pub min_grad_norm: f64,
    /// KL divergence is recorded every this many iterations.
    pub checkpoint_every: usize,
    pub seed: u64,
}

impl Default for TsneOptions {
    fn default() -> Self {
        TsneOptions {
            perplexity: 50.0,
            dims: 2,
            iterations: 1000,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            learning_rate: None,
            min_gain: 0.01,
            min_grad_norm: 1e-7,
            checkpoint_every: 50,
            seed: 0,
        }
    }
}

/// Per-point Gaussian bandwidths and the resulting conditional distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Row i holds p(j | i).
    pub conditional: DMatrix<f64>,
    pub beta: Vec<f64>,
    /// Natural-log entropy of each row.
    pub entropy: Vec<f64>,
    pub achieved_perplexity: Vec<f64>,
}

impl Calibration {
    pub fn max_perplexity_error(&self, target: f64) -> f64 {
        self.achieved_perplexity.iter().map(|p| (p - target).abs()).fold(0.0, f64::max)
    }

    pub fn max_entropy_error(&self, target: f64) -> f64 {
        let h = target.ln();
        self.entropy.iter().map(|e| (e - h).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMap {
    /// Rows are items.
    pub coords: DMatrix<f64>,
    pub perplexity: f64,
    pub kl_divergence: f64,
    /// (iteration, KL against the unexaggerated affinities)
    pub kl_history: Vec<(usize, f64)>,
    pub iterations: usize,
    pub achieved_perplexity: Vec<f64>,
}

pub fn squared_euclidean_matrix(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| (0..x.ncols()).map(|k| (x[(i, k)] - x[(j, k)]).powi(2)).sum()).collect())
        .collect();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// 1 − Tanimoto, used unsquared as the affinity distance.
pub fn jaccard_distance_matrix(fps: &[Fingerprint]) -> Result<DMatrix<f64>, MlError> {
    let n = fps.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| tanimoto(&fps[i], &fps[j]).map(|t| 1.0 - t).map_err(|e| MlError::InvalidParameter(e.to_string())))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn check_distances(d: &DMatrix<f64>) -> Result<(), MlError> {
    if d.nrows() != d.ncols() {
        return Err(MlError::DimensionMismatch { expected: d.nrows(), got: d.ncols() });
    }
    if d.nrows() < 2 {
        return Err(MlError::InvalidParameter("need at least two items".into()));
    }
    if d.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(MlError::InvalidParameter("distances must be finite and non-negative".into()));
    }
    let n = d.nrows();
    if (0..n).all(|i| (0..n).all(|j| i == j || d[(i, j)] == 0.0)) {
        return Err(MlError::DegenerateDistances);
    }
    Ok(())
}

fn row_distribution(d: &[f64], beta: f64, p: &mut [f64]) -> f64 {
    let mut z = 0.0;
    let mut dp = 0.0;
    for (pj, &dj) in p.iter_mut().zip(d) {
        *pj = (-dj * beta).exp();
        z += *pj;
        dp += dj * *pj;
    }
    for pj in p.iter_mut() {
        *pj /= z;
    }
    z.ln() + beta * dp / z
}

/// Finds β_i per row by bisection so that exp(H_i) equals the perplexity.
pub fn calibrate_affinities(d: &DMatrix<f64>, perplexity: f64) -> Result<Calibration, MlError> {
    check_distances(d)?;
    let n = d.nrows();
    if !(perplexity > 0.0) || perplexity >= n as f64 {
        return Err(MlError::InvalidParameter(format!("perplexity {perplexity} must lie in (0, {n})")));
    }
    let target = perplexity.ln();
    let rows: Vec<(Vec<f64>, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let dmin = others.iter().map(|&j| d[(i, j)]).fold(f64::INFINITY, f64::min);
            // Shifting by the row minimum leaves p unchanged and avoids underflow.
            let di: Vec<f64> = others.iter().map(|&j| d[(i, j)] - dmin).collect();
            let mut p = vec![0.0; di.len()];
            let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
            let mut beta = 1.0;
            let mut h = row_distribution(&di, beta, &mut p);
            for _ in 0..MAX_BISECTION_STEPS {
                if (h - target).abs() < ENTROPY_TOLERANCE {
                    break;
                }
                if h > target {
                    lo = beta;
                    beta = if hi.is_infinite() { beta * 2.0 } else { 0.5 * (beta + hi) };
                } else {
                    hi = beta;
                    beta = 0.5 * (beta + lo);
                }
                h = row_distribution(&di, beta, &mut p);
            }
            let mut full = vec![0.0; n];
            for (k, &j) in others.iter().enumerate() {
                full[j] = p[k];
            }
            (full, beta, h)
        })
        .collect();
    let conditional = DMatrix::from_fn(n, n, |i, j| rows[i].0[j]);
    let entropy: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let cal = Calibration {
        conditional,
        beta: rows.iter().map(|r| r.1).collect(),
        achieved_perplexity: entropy.iter().map(|h| h.exp()).collect(),
        entropy,
    };
    let worst = cal.max_entropy_error(perplexity);
    if worst >= 1e-4 {
        log::warn!("perplexity calibration missed its target by {worst:e} in entropy");
    }
    Ok(cal)
}

fn joint(cal: &Calibration) -> Vec<f64> {
    let n = cal.conditional.nrows();
    let c = &cal.conditional;
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((c[(i, j)] + c[(j, i)]) / (2.0 * n as f64)).max(MACHINE_EPSILON);
        }
        p[i * n + i] = 0.0;
    }
    p
}

/// KL(P‖Q) and its gradient with respect to the flat coordinates.
fn kl_and_gradient(p: &[f64], y: &[f64], n: usize, dims: usize, exaggeration: f64, grad: &mut [f64]) -> f64 {
    let num: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..n).map(move |j| {
                if i == j {
                    return 0.0;
                }
                let d2: f64 = (0..dims).map(|k| (y[i * dims + k] - y[j * dims + k]).powi(2)).sum();
                1.0 / (1.0 + d2)
            })
        })
        .collect();
    let z: f64 = num.iter().sum();
    grad.par_chunks_mut(dims).enumerate().for_each(|(i, g)| {
        g.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = num[i * n + j];
            let coef = 4.0 * (exaggeration * p[i * n + j] - w / z) * w;
            for k in 0..dims {
                g[k] += coef * (y[i * dims + k] - y[j * dims + k]);
            }
        }
    });
    (0..n * n)
        .filter(|&ij| ij / n != ij % n)
        .map(|ij| {
            let pij = exaggeration * p[ij];
            let q = (num[ij] / z).max(MACHINE_EPSILON);
            pij * (pij.max(MACHINE_EPSILON) / q).ln()
        })
        .sum()
}

/// Exact t-SNE on a matrix of affinity distances (squared Euclidean for
/// vectors, Jaccard for fingerprints).
pub fn tsne(d: &DMatrix<f64>, opts: &TsneOptions) -> Result<EmbeddingMap, MlError> {
    if opts.dims == 0 || opts.checkpoint_every == 0 || !(opts.early_exaggeration >= 1.0) || !(opts.min_gain > 0.0) {
        return Err(MlError::InvalidParameter("invalid t-SNE options".into()));
    }
    let cal = calibrate_affinities(d, opts.perplexity)?;
    let n = d.nrows();
    if (n as f64) < 3.0 * opts.perplexity {
        log::warn!("{n} items is fewer than three times the perplexity {}", opts.perplexity);
    }
    let p = joint(&cal);
    let dims = opts.dims;
    let lr = opts.learning_rate.unwrap_or((n as f64 / opts.early_exaggeration / 4.0).max(50.0));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<f64> = (0..n * dims).map(|_| normal.sample(&mut rng)).collect();
    let mut grad = vec![0.0; n * dims];
    let mut history = Vec::new();
    let mut it = 0;
    let stages = [
        (opts.exaggeration_iterations.min(opts.iterations), 0.5, opts.early_exaggeration),
        (opts.iterations, 0.8, 1.0),
    ];
    for (end, momentum, exaggeration) in stages {
        let mut update = vec![0.0; n * dims];
        let mut gains = vec![1.0_f64; n * dims];
        while it < end {
            kl_and_gradient(&p, &y, n, dims, exaggeration, &mut grad);
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            for k in 0..n * dims {
                if update[k] * grad[k] < 0.0 {
                    gains[k] += 0.2;
                } else {
                    gains[k] = (gains[k] * 0.8).max(opts.min_gain);
                }
                update[k] = momentum * update[k] - lr * gains[k] * grad[k];
                y[k] += update[k];
            }
            it += 1;
            if it % opts.checkpoint_every == 0 {
                history.push((it, kl_and_gradient(&p, &y, n, dims, 1.0, &mut grad)));
            }
            if gnorm < opts.min_grad_norm {
                break;
            }
        }
    }
    let kl = kl_and_gradient(&p, &y, n, dims, 1.0, &mut grad);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(MlError::Numerical("t-SNE coordinates diverged".into()));
    }
    Ok(EmbeddingMap {
        coords: DMatrix::from_row_slice(n, dims, &y),
        perplexity: opts.perplexity,
        kl_divergence: kl.max(0.0),
        kl_history: history,
        iterations: it,
        achieved_perplexity: cal.achieved_perplexity,
    })
}
