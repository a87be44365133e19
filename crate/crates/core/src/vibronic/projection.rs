use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{NormalModeSet, VibronicError};

/// ρ[i][j] = |⟨ν_i isolated | ν_j embedded⟩|² restricted to emitter coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMatrix {
    /// Rows: isolated emitter modes; columns: embedded complex modes.
    pub rho: DMatrix<f64>,
    /// Complex atom index of each emitter atom.
    pub emitter_atoms: Vec<usize>,
}

impl ProjectionMatrix {
    pub fn row_sums(&self) -> Vec<f64> {
        self.rho.row_iter().map(|r| r.sum()).collect()
    }

    /// S^P_i for every isolated mode.
    pub fn entropies(&self) -> Vec<f64> {
        (0..self.rho.nrows())
            .into_par_iter()
            .map(|i| projection_entropy(self.rho.row(i).iter().copied()))
            .collect()
    }
}

fn check_map(isolated: &NormalModeSet, embedded: &NormalModeSet, emitter_atoms: &[usize]) -> Result<(), VibronicError> {
    isolated.require_orthonormal_convention()?;
    embedded.require_orthonormal_convention()?;
    if emitter_atoms.len() != isolated.n_atoms() {
        return Err(VibronicError::DimensionMismatch {
            expected: isolated.n_atoms(),
            got: emitter_atoms.len(),
        });
    }
    if let Some(&bad) = emitter_atoms.iter().find(|&&a| a >= embedded.n_atoms()) {
        return Err(VibronicError::IndexOutOfRange(bad));
    }
    Ok(())
}

/// Rows of the embedded mode matrix belonging to the emitter, in emitter order.
fn emitter_rows(embedded: &NormalModeSet, emitter_atoms: &[usize]) -> DMatrix<f64> {
    let n = embedded.n_modes();
    DMatrix::from_fn(3 * emitter_atoms.len(), n, |r, j| {
        embedded.modes[(3 * emitter_atoms[r / 3] + r % 3, j)]
    })
}

/// Squared overlaps of isolated emitter modes with embedded complex modes,
/// integrating over emitter coordinates only.
pub fn mode_overlap_matrix(
    isolated: &NormalModeSet,
    embedded: &NormalModeSet,
    emitter_atoms: &[usize],
) -> Result<ProjectionMatrix, VibronicError> {
    check_map(isolated, embedded, emitter_atoms)?;
    let sub = emitter_rows(embedded, emitter_atoms);
    let overlaps = isolated.modes.transpose() * sub;
    Ok(ProjectionMatrix {
        rho: overlaps.map(|x| x * x),
        emitter_atoms: emitter_atoms.to_vec(),
    })
}

/// −Σ ρ ln ρ with 0·ln 0 = 0. Entries are clamped into [0, 1] first to
/// absorb rounding.
pub fn projection_entropy(row: impl IntoIterator<Item = f64>) -> f64 {
    let s: f64 = row
        .into_iter()
        .map(|p| p.clamp(0.0, 1.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    s.max(0.0)
}

/// Whether forces are projected as given or after scaling by M^{-1/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceWeighting {
    #[default]
    Cartesian,
    InverseSqrtMass,
}

fn flatten(forces: &[Vector3<f64>]) -> DVector<f64> {
    DVector::from_iterator(3 * forces.len(), forces.iter().flat_map(|f| f.iter().copied()))
}

/// g_i = |⟨F|ν_i⟩|² for every isolated mode.
pub fn force_projection(
    forces: &[Vector3<f64>],
    isolated: &NormalModeSet,
    weighting: ForceWeighting,
) -> Result<Vec<f64>, VibronicError> {
    isolated.require_orthonormal_convention()?;
    if forces.len() != isolated.n_atoms() {
        return Err(VibronicError::DimensionMismatch {
            expected: isolated.n_atoms(),
            got: forces.len(),
        });
    }
    let mut f = flatten(forces);
    if weighting == ForceWeighting::InverseSqrtMass {
        f.component_div_assign(&isolated.sqrt_mass_diagonal());
    }
    Ok((isolated.modes.transpose() * f).iter().map(|c| c * c).collect())
}

/// S^VC = Σ g_i S^P_i.
pub fn vibronic_coupling_entropy(g: &[f64], entropies: &[f64]) -> Result<f64, VibronicError> {
    if g.len() != entropies.len() {
        return Err(VibronicError::DimensionMismatch {
            expected: g.len(),
            got: entropies.len(),
        });
    }
    Ok(g.iter().zip(entropies).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectFc {
    /// |Σ_j ⟨F|ν_j embedded⟩|
    pub direct: f64,
    /// |Σ_ij ⟨F|ν_i⟩⟨ν_i|ν_j embedded⟩|
    pub unity_inserted: f64,
}

/// Tolerance on |direct − unity_inserted| relative to max(1, |F|·√(3N)).
pub const COMPLETENESS_TOLERANCE: f64 = 1e-8;

/// Zero-phonon estimate from emitter forces summed over embedded modes,
/// evaluated directly and with the isolated-mode identity inserted. Fails
/// when the two disagree, which signals an incomplete isolated basis.
pub fn direct_fc_metric(
    forces: &[Vector3<f64>],
    isolated: &NormalModeSet,
    embedded: &NormalModeSet,
    emitter_atoms: &[usize],
) -> Result<DirectFc, VibronicError> {
    check_map(isolated, embedded, emitter_atoms)?;
    if forces.len() != emitter_atoms.len() {
        return Err(VibronicError::DimensionMismatch {
            expected: emitter_atoms.len(),
            got: forces.len(),
        });
    }
    let f = flatten(forces);
    let sub = emitter_rows(embedded, emitter_atoms);
    // forces vanish outside emitter coordinates, so ⟨F|ν_j⟩ only sees `sub`
    let direct = (sub.transpose() * &f).sum();
    let coeffs = isolated.modes.transpose() * &f;
    let overlaps = isolated.modes.transpose() * sub;
    let unity = (overlaps.transpose() * coeffs).sum();
    let scale = (f.norm() * (embedded.n_modes() as f64).sqrt()).max(1.0);
    let diff = (direct - unity).abs();
    if diff > COMPLETENESS_TOLERANCE * scale {
        return Err(VibronicError::Incomplete(diff));
    }
    Ok(DirectFc {
        direct: direct.abs(),
        unity_inserted: unity.abs(),
    })
}
