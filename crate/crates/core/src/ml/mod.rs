//! Labeling, PCA, Gaussian-process classification, t-SNE and density
//! clustering of screened candidates.

mod gpc;
mod hdbscan;
mod label;
mod pca;
mod tsne;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectro::CandidateRecord;

pub use gpc::{expected_sigmoid, GpcBounds, GpcModel, GpcOptions, LaplacePosterior};
pub use hdbscan::{density_cluster, ClusterSelection, Clustering, NOISE};
pub use label::label_good;
pub use pca::{pca, standardize, PcaResult, Standardized};
pub use tsne::{calibrate_affinities, jaccard_distance_matrix, squared_euclidean_matrix, tsne, Calibration, EmbeddingMap, TsneOptions};

#[derive(Debug, Error)]
pub enum MlError {
    #[error("empty input")]
    Empty,
    #[error("requested {requested} components but only {available} are available")]
    TooManyComponents { requested: usize, available: usize },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("all pairwise distances are zero")]
    DegenerateDistances,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl MlError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, MlError::Numerical(_))
    }
}

/// Column names of the feature space, in record order. Rotary strength is
/// left out.
pub const FEATURE_NAMES: [&str; 10] =
    ["tanimoto", "fosc_abs", "fosc_em", "lambda_abs_nm", "lambda_em_nm", "soc", "rsoc", "gs_soc", "svc", "e_bind_eV"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub names: Vec<String>,
    /// Rows are candidates.
    pub values: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn from_records(records: &[CandidateRecord]) -> Result<Self, MlError> {
        if records.is_empty() {
            return Err(MlError::Empty);
        }
        let rows: Vec<[f64; 10]> = records
            .iter()
            .map(|r| [r.tanimoto, r.fosc_abs, r.fosc_em, r.lambda_abs_nm, r.lambda_em_nm, r.soc, r.rsoc, r.gs_soc, r.svc, r.e_bind_ev])
            .collect();
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(MlError::InvalidParameter("non-finite feature value".into()));
        }
        Ok(FeatureMatrix {
            ids: records.iter().map(|r| r.id.clone()).collect(),
            names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            values: DMatrix::from_fn(rows.len(), 10, |i, j| rows[i][j]),
        })
    }
}
