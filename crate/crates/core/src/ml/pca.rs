use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::MlError;

/// Z-scored copy of a data matrix (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardized {
    pub z: DMatrix<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Input column index of every retained column.
    pub retained: Vec<usize>,
}

/// Columns with zero variance are dropped with a warning.
pub fn standardize(x: &DMatrix<f64>) -> Result<Standardized, MlError> {
    let n = x.nrows();
    if n == 0 || x.ncols() == 0 {
        return Err(MlError::Empty);
    }
    let mut retained = Vec::new();
    let (mut means, mut stds) = (Vec::new(), Vec::new());
    for j in 0..x.ncols() {
        let col = x.column(j);
        let m = col.mean();
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
        let s = var.sqrt();
        if s <= 1e-12 * m.abs().max(1.0) {
            log::warn!("dropping zero-variance column {j}");
            continue;
        }
        retained.push(j);
        means.push(m);
        stds.push(s);
    }
    let z = DMatrix::from_fn(n, retained.len(), |i, k| (x[(i, retained[k])] - means[k]) / stds[k]);
    Ok(Standardized { z, mean: means, std: stds, retained })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub standardized: Standardized,
    /// Column k is component k, over retained columns.
    pub components: DMatrix<f64>,
    /// Rows are samples.
    pub scores: DMatrix<f64>,
    pub explained_variance: Vec<f64>,
    pub explained_ratio: Vec<f64>,
}

/// Principal components of the z-scored data from the sample covariance
/// (n − 1), variances descending, each component's largest loading positive.
pub fn pca(x: &DMatrix<f64>, k: usize) -> Result<PcaResult, MlError> {
    if x.nrows() < 2 {
        return Err(MlError::InvalidParameter("PCA needs at least two rows".into()));
    }
    let st = standardize(x)?;
    let p = st.z.ncols();
    if k == 0 || k > p {
        return Err(MlError::TooManyComponents { requested: k, available: p });
    }
    let cov = st.z.transpose() * &st.z / (x.nrows() as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let mut components = DMatrix::zeros(p, k);
    let mut variance = Vec::with_capacity(k);
    for (dst, &src) in order.iter().take(k).enumerate() {
        let mut c = eig.eigenvectors.column(src).into_owned();
        let big = c.iter().enumerate().fold(0, |b, (i, v)| if v.abs() > c[b].abs() + 1e-12 { i } else { b });
        if c[big] < 0.0 {
            c.neg_mut();
        }
        components.set_column(dst, &c);
        variance.push(eig.eigenvalues[src].max(0.0));
    }
    let scores = &st.z * &components;
    Ok(PcaResult {
        explained_ratio: variance.iter().map(|v| v / total).collect(),
        explained_variance: variance,
        standardized: st,
        components,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn collinear_data_has_one_component() {
        let x = DMatrix::from_fn(6, 2, |i, j| if j == 0 { i as f64 } else { 3.0 * i as f64 + 1.0 });
        let r = pca(&x, 2).unwrap();
        assert_relative_eq!(r.explained_ratio[0], 1.0, epsilon = 1e-12);
        assert!(r.explained_ratio[1].abs() < 1e-12);
    }

    #[test]
    fn orthonormal_and_full_reconstruction() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let x = DMatrix::from_fn(30, 5, |_, j| rng.random_range(-1.0..1.0) * (j + 1) as f64 + j as f64 * 10.0);
        let r = pca(&x, 5).unwrap();
        let g = r.components.transpose() * &r.components;
        assert!((g - DMatrix::identity(5, 5)).amax() < 1e-10);
        let back = &r.scores * r.components.transpose();
        assert!((back - &r.standardized.z).amax() < 1e-8);
        assert_relative_eq!(r.explained_ratio.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(r.explained_variance.windows(2).all(|w| w[0] >= w[1]));
        assert!(matches!(pca(&x, 6), Err(MlError::TooManyComponents { .. })));
    }

    #[test]
    fn constant_columns_dropped() {
        let x = DMatrix::from_fn(4, 3, |i, j| if j == 1 { 7.0 } else { (i * (j + 1)) as f64 });
        let st = standardize(&x).unwrap();
        assert_eq!(st.retained, vec![0, 2]);
        for k in 0..2 {
            let c = st.z.column(k);
            assert!(c.mean().abs() < 1e-12);
            assert_relative_eq!(c.iter().map(|v| v * v).sum::<f64>() / 4.0, 1.0, epsilon = 1e-12);
        }
    }
}
