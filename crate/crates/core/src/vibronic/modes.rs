use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::VibronicError;
use crate::units;

/// How the columns of a mode matrix are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeConvention {
    /// Orthonormal eigenvectors of M^{-1/2} K M^{-1/2}.
    MassWeightedOrthonormal,
    /// Cartesian displacements M^{-1/2}·u with u orthonormal (ASE output).
    InverseMassNormalized,
    /// Cartesian displacements scaled to unit length (ORCA output).
    MassWeightedThenNormalized,
}

impl std::str::FromStr for ModeConvention {
    type Err = VibronicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mass-weighted-orthonormal" => Ok(ModeConvention::MassWeightedOrthonormal),
            "inverse-mass-normalized" | "ase" => Ok(ModeConvention::InverseMassNormalized),
            "mass-weighted-then-normalized" | "orca" => Ok(ModeConvention::MassWeightedThenNormalized),
            other => Err(VibronicError::UnknownConvention(other.to_string())),
        }
    }
}

/// Normal modes of one structure. Column k of `modes` is mode k; rows are
/// Cartesian coordinates 3·atom + axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalModeSet {
    /// Eigenvalues of the mass-weighted Hessian (eV Å⁻² amu⁻¹), ascending.
    pub eigenvalues: Vec<f64>,
    pub modes: DMatrix<f64>,
    /// Per-atom masses (amu).
    pub masses: Vec<f64>,
    pub convention: ModeConvention,
}

impl NormalModeSet {
    pub fn n_atoms(&self) -> usize {
        self.masses.len()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.ncols()
    }

    /// Wavenumber of mode k (cm⁻¹), negative when imaginary.
    pub fn frequency_cm1(&self, k: usize) -> f64 {
        units::eigenvalue_to_cm1(self.eigenvalues[k])
    }

    pub fn frequencies_cm1(&self) -> Vec<f64> {
        (0..self.n_modes()).map(|k| self.frequency_cm1(k)).collect()
    }

    /// Angular frequency of mode k in rad/s, negative when imaginary.
    pub fn omega_si(&self, k: usize) -> f64 {
        units::eigenvalue_to_omega_si(self.eigenvalues[k])
    }

    /// Angular frequency of mode k in Hartree atomic units.
    pub fn omega_au(&self, k: usize) -> f64 {
        units::eigenvalue_to_omega_au(self.eigenvalues[k])
    }

    pub fn is_imaginary(&self, k: usize) -> bool {
        self.eigenvalues[k] < 0.0
    }

    /// Modes at or above `floor_cm1` and not imaginary.
    pub fn vibrational_mask(&self, floor_cm1: f64) -> Vec<bool> {
        (0..self.n_modes())
            .map(|k| !self.is_imaginary(k) && self.frequency_cm1(k) >= floor_cm1)
            .collect()
    }

    /// √m repeated for each Cartesian coordinate.
    pub fn sqrt_mass_diagonal(&self) -> DVector<f64> {
        sqrt_mass_diagonal(&self.masses)
    }

    /// max |UᵀU − I|.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.modes.transpose() * &self.modes;
        let n = g.nrows();
        (g - DMatrix::identity(n, n)).amax()
    }

    pub fn require_orthonormal_convention(&self) -> Result<(), VibronicError> {
        if self.convention != ModeConvention::MassWeightedOrthonormal {
            return Err(VibronicError::ConventionMismatch(self.convention));
        }
        Ok(())
    }

    /// Cartesian Hessian (eV/Å²) implied by a complete orthonormal mode set,
    /// M^{1/2} U Λ Uᵀ M^{1/2}.
    pub fn hessian(&self) -> Result<DMatrix<f64>, VibronicError> {
        self.require_orthonormal_convention()?;
        let m = 3 * self.n_atoms();
        if self.modes.nrows() != m || self.modes.ncols() != m {
            return Err(VibronicError::DimensionMismatch { expected: m, got: self.modes.ncols() });
        }
        let w = self.sqrt_mass_diagonal();
        let scaled = DMatrix::from_fn(m, m, |r, k| self.modes[(r, k)] * self.eigenvalues[k]);
        let d = scaled * self.modes.transpose();
        Ok(DMatrix::from_fn(m, m, |i, j| w[i] * d[(i, j)] * w[j]))
    }

    /// Mode matrix expressed in another convention, for export or round trips.
    pub fn to_convention(&self, target: ModeConvention) -> Result<DMatrix<f64>, VibronicError> {
        self.require_orthonormal_convention()?;
        let w = self.sqrt_mass_diagonal();
        let mut out = self.modes.clone();
        match target {
            ModeConvention::MassWeightedOrthonormal => {}
            ModeConvention::InverseMassNormalized => {
                for mut c in out.column_iter_mut() {
                    c.component_div_assign(&w);
                }
            }
            ModeConvention::MassWeightedThenNormalized => {
                for mut c in out.column_iter_mut() {
                    c.component_div_assign(&w);
                    let n = c.norm();
                    if n > 0.0 {
                        c /= n;
                    }
                }
            }
        }
        Ok(out)
    }
}

pub(crate) fn sqrt_mass_diagonal(masses: &[f64]) -> DVector<f64> {
    DVector::from_iterator(3 * masses.len(), masses.iter().flat_map(|m| [m.sqrt(); 3]))
}

fn fix_sign(mut c: nalgebra::DVectorViewMut<f64>) {
    // largest component positive; first one wins on ties
    let mut best = 0;
    for i in 1..c.len() {
        if c[i].abs() > c[best].abs() + 1e-12 {
            best = i;
        }
    }
    if !c.is_empty() && c[best] < 0.0 {
        c.neg_mut();
    }
}

/// Relative asymmetry tolerated by [`normal_modes`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// Diagonalizes M^{-1/2} K M^{-1/2} for a Hessian in eV/Å² and masses in amu.
/// Modes come back orthonormal, sorted by ascending eigenvalue, with each
/// column's largest component made positive.
pub fn normal_modes(hessian: &DMatrix<f64>, masses: &[f64]) -> Result<NormalModeSet, VibronicError> {
    let m = 3 * masses.len();
    if hessian.nrows() != m || hessian.ncols() != m {
        return Err(VibronicError::DimensionMismatch {
            expected: m,
            got: hessian.nrows(),
        });
    }
    if masses.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(VibronicError::InvalidInput("masses must be positive".into()));
    }
    if hessian.iter().any(|v| !v.is_finite()) {
        return Err(VibronicError::InvalidInput("hessian has non-finite entries".into()));
    }
    let asym = (hessian - hessian.transpose()).amax();
    let scale = hessian.amax().max(1.0);
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(VibronicError::NotSymmetric(asym));
    }
    let w = sqrt_mass_diagonal(masses);
    let d = DMatrix::from_fn(m, m, |i, j| 0.5 * (hessian[(i, j)] + hessian[(j, i)]) / (w[i] * w[j]));
    let eig = SymmetricEigen::new(d);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut modes = DMatrix::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        modes.set_column(dst, &eig.eigenvectors.column(src));
        fix_sign(modes.column_mut(dst));
    }
    Ok(NormalModeSet {
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        modes,
        masses: masses.to_vec(),
        convention: ModeConvention::MassWeightedOrthonormal,
    })
}

/// Brings externally computed modes into the mass-weighted orthonormal
/// convention. Both Cartesian-displacement conventions are multiplied by √M
/// and renormalized; orthonormal sets pass through unchanged.
pub fn reweight_external_modes(
    raw: &DMatrix<f64>,
    eigenvalues: &[f64],
    masses: &[f64],
    convention: ModeConvention,
) -> Result<NormalModeSet, VibronicError> {
    let m = 3 * masses.len();
    if raw.nrows() != m || eigenvalues.len() != raw.ncols() {
        return Err(VibronicError::DimensionMismatch {
            expected: m,
            got: raw.nrows(),
        });
    }
    let mut modes = raw.clone();
    if convention != ModeConvention::MassWeightedOrthonormal {
        let w = sqrt_mass_diagonal(masses);
        for mut c in modes.column_iter_mut() {
            c.component_mul_assign(&w);
            let n = c.norm();
            if n == 0.0 {
                return Err(VibronicError::InvalidInput("zero-length mode vector".into()));
            }
            c /= n;
        }
    }
    Ok(NormalModeSet {
        eigenvalues: eigenvalues.to_vec(),
        modes,
        masses: masses.to_vec(),
        convention: ModeConvention::MassWeightedOrthonormal,
    })
}

/// Mode-set file layout: each entry of `modes` is one mode vector of
/// length 3N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFile {
    pub frequencies_cm1: Vec<f64>,
    pub modes: Vec<Vec<f64>>,
    pub masses_amu: Vec<f64>,
    pub convention: String,
}

impl ModeFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, VibronicError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| VibronicError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| VibronicError::InvalidInput(e.to_string()))
    }

    pub fn into_mode_set(self) -> Result<NormalModeSet, VibronicError> {
        let convention: ModeConvention = self.convention.parse()?;
        let m = 3 * self.masses_amu.len();
        if self.modes.len() != self.frequencies_cm1.len() || self.modes.iter().any(|r| r.len() != m) {
            return Err(VibronicError::DimensionMismatch {
                expected: m,
                got: self.modes.first().map_or(0, |r| r.len()),
            });
        }
        let raw = DMatrix::from_fn(m, self.modes.len(), |i, k| self.modes[k][i]);
        let eig: Vec<f64> = self.frequencies_cm1.iter().map(|&f| units::cm1_to_eigenvalue(f)).collect();
        reweight_external_modes(&raw, &eig, &self.masses_amu, convention)
    }

    pub fn from_mode_set(set: &NormalModeSet) -> Self {
        ModeFile {
            frequencies_cm1: set.frequencies_cm1(),
            modes: set.modes.column_iter().map(|c| c.iter().copied().collect()).collect(),
            masses_amu: set.masses.clone(),
            convention: "mass-weighted-orthonormal".into(),
        }
    }
}
