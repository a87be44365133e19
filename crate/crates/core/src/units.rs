//! Physical constants and unit conversions.
//!
//! Inputs throughout the crate use Å, amu, eV and cm⁻¹. Quantities that are
//! defined with ħ = 1 (Huang-Rhys factors) are evaluated in Hartree atomic
//! units. All values are CODATA 2018.

/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light (cm/s).
pub const SPEED_OF_LIGHT_CM: f64 = 2.997_924_58e10;
/// Bohr radius (m).
pub const BOHR_M: f64 = 5.291_772_109_03e-11;
/// Hartree energy (J).
pub const HARTREE_J: f64 = 4.359_744_722_207_1e-18;
/// Electron mass (kg).
pub const ELECTRON_MASS_KG: f64 = 9.109_383_701_5e-31;
/// Atomic mass constant (kg).
pub const AMU_KG: f64 = 1.660_539_066_60e-27;

pub const EV_J: f64 = ELEMENTARY_CHARGE;
pub const ANGSTROM_M: f64 = 1e-10;

pub const ANGSTROM_TO_BOHR: f64 = ANGSTROM_M / BOHR_M;
pub const EV_TO_HARTREE: f64 = EV_J / HARTREE_J;
pub const AMU_TO_ELECTRON_MASS: f64 = AMU_KG / ELECTRON_MASS_KG;

/// Angular frequency (rad/s) of a unit eigenvalue of the mass-weighted
/// Hessian expressed in eV Å⁻² amu⁻¹.
pub fn omega_si_per_sqrt_eig() -> f64 {
    (EV_J / (ANGSTROM_M * ANGSTROM_M * AMU_KG)).sqrt()
}

/// Converts a mass-weighted Hessian eigenvalue (eV Å⁻² amu⁻¹) to an angular
/// frequency in rad/s. Negative eigenvalues map to negative frequencies.
pub fn eigenvalue_to_omega_si(lambda: f64) -> f64 {
    lambda.signum() * lambda.abs().sqrt() * omega_si_per_sqrt_eig()
}

/// Converts a mass-weighted Hessian eigenvalue to wavenumbers (cm⁻¹),
/// negative for imaginary modes.
pub fn eigenvalue_to_cm1(lambda: f64) -> f64 {
    eigenvalue_to_omega_si(lambda) / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM)
}

/// Inverse of [`eigenvalue_to_cm1`].
pub fn cm1_to_eigenvalue(nu: f64) -> f64 {
    let omega = nu * 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM / omega_si_per_sqrt_eig();
    omega.signum() * omega * omega
}

/// Converts a mass-weighted Hessian eigenvalue to an angular frequency in
/// Hartree atomic units (ħ = 1, so this is also an energy in Hartree).
pub fn eigenvalue_to_omega_au(lambda: f64) -> f64 {
    let scale = EV_TO_HARTREE / (ANGSTROM_TO_BOHR * ANGSTROM_TO_BOHR * AMU_TO_ELECTRON_MASS);
    lambda.signum() * (lambda.abs() * scale).sqrt()
}

/// MHz shift per (atomic unit of dipole moment × kV/cm of field).
///
/// e·a₀·(1 kV/cm)/h, with 1 kV/cm = 1e5 V/m.
pub fn stark_linear_mhz_per_au() -> f64 {
    ELEMENTARY_CHARGE * BOHR_M * 1e5 / PLANCK * 1e-6
}

/// MHz shift per (atomic unit of polarizability × (kV/cm)²).
///
/// The atomic unit of polarizability is e²a₀²/E_h.
pub fn stark_quadratic_mhz_per_au() -> f64 {
    let alpha_au_si = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * BOHR_M * BOHR_M / HARTREE_J;
    alpha_au_si * 1e10 / PLANCK * 1e-6
}
