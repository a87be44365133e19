use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::{NormalModeSet, VibronicError};
use crate::units::{AMU_TO_ELECTRON_MASS, ANGSTROM_TO_BOHR};

/// Modes below this wavenumber (cm⁻¹) count as rigid-body motion.
pub const DEFAULT_FREQUENCY_FLOOR_CM1: f64 = 10.0;

/// Mass-weighted displacement of every mode, Δ_k = (R₀ − R₁)·√M·u_k, in
/// Å·amu^½.
pub fn mode_displacements(
    r_ground: &[Vector3<f64>],
    r_excited: &[Vector3<f64>],
    modes: &NormalModeSet,
) -> Result<Vec<f64>, VibronicError> {
    modes.require_orthonormal_convention()?;
    if r_ground.len() != modes.n_atoms() || r_excited.len() != modes.n_atoms() {
        return Err(VibronicError::DimensionMismatch {
            expected: modes.n_atoms(),
            got: r_ground.len().max(r_excited.len()),
        });
    }
    let w = modes.sqrt_mass_diagonal();
    let d = DVector::from_iterator(
        w.len(),
        r_ground.iter().zip(r_excited).flat_map(|(a, b)| (a - b).iter().copied().collect::<Vec<_>>()),
    );
    Ok((modes.modes.transpose() * d.component_mul(&w)).iter().copied().collect())
}

/// S_k = ω_k Δ_k² / 2 in Hartree atomic units. Imaginary modes and modes
/// below `floor_cm1` get S_k = 0.
pub fn huang_rhys(
    r_ground: &[Vector3<f64>],
    r_excited: &[Vector3<f64>],
    modes: &NormalModeSet,
    floor_cm1: f64,
) -> Result<Vec<f64>, VibronicError> {
    let delta = mode_displacements(r_ground, r_excited, modes)?;
    let to_au = ANGSTROM_TO_BOHR * AMU_TO_ELECTRON_MASS.sqrt();
    let mask = modes.vibrational_mask(floor_cm1);
    Ok(delta
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            if !mask[k] {
                return 0.0;
            }
            let d = d * to_au;
            0.5 * modes.omega_au(k) * d * d
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedHr {
    /// ω_k² S_k / ω_max² per mode.
    pub per_mode: Vec<f64>,
    pub sum: f64,
    pub omega_max_cm1: f64,
}

/// Frequency-weighted Huang-Rhys factors relative to the highest real mode.
pub fn weighted_hr(s: &[f64], modes: &NormalModeSet) -> Result<WeightedHr, VibronicError> {
    if s.len() != modes.n_modes() {
        return Err(VibronicError::DimensionMismatch {
            expected: modes.n_modes(),
            got: s.len(),
        });
    }
    let lam_max = modes.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lam_max > 0.0) {
        return Err(VibronicError::NoRealModes);
    }
    let per_mode: Vec<f64> = s
        .iter()
        .zip(&modes.eigenvalues)
        .map(|(&sk, &lam)| if lam > 0.0 { lam / lam_max * sk } else { 0.0 })
        .collect();
    Ok(WeightedHr {
        sum: per_mode.iter().sum(),
        per_mode,
        omega_max_cm1: crate::units::eigenvalue_to_cm1(lam_max),
    })
}
