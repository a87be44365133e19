//! Normal modes, isolated-to-embedded mode projection, vibronic coupling
//! entropy and Huang-Rhys factors.

mod huang_rhys;
mod modes;
mod projection;

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use huang_rhys::{huang_rhys, mode_displacements, weighted_hr, WeightedHr, DEFAULT_FREQUENCY_FLOOR_CM1};
pub use modes::{normal_modes, reweight_external_modes, ModeConvention, ModeFile, NormalModeSet, SYMMETRY_TOLERANCE};
pub use projection::{
    direct_fc_metric, force_projection, mode_overlap_matrix, projection_entropy, vibronic_coupling_entropy,
    DirectFc, ForceWeighting, ProjectionMatrix, COMPLETENESS_TOLERANCE,
};

#[derive(Debug, Error)]
pub enum VibronicError {
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hessian asymmetry {0:.3e} exceeds tolerance")]
    NotSymmetric(f64),
    #[error("unknown mode convention `{0}`")]
    UnknownConvention(String),
    #[error("modes must be mass-weighted orthonormal, got {0:?}")]
    ConventionMismatch(ModeConvention),
    #[error("emitter atom index {0} is outside the complex")]
    IndexOutOfRange(usize),
    #[error("no real vibrational frequency")]
    NoRealModes,
    #[error("isolated mode basis incomplete: direct and unity-inserted forms differ by {0:.3e}")]
    Incomplete(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VibronicOptions {
    /// Modes below this wavenumber are treated as rigid-body motion (cm⁻¹).
    pub frequency_floor_cm1: f64,
    pub force_weighting: ForceWeighting,
}

impl Default for VibronicOptions {
    fn default() -> Self {
        VibronicOptions {
            frequency_floor_cm1: DEFAULT_FREQUENCY_FLOOR_CM1,
            force_weighting: ForceWeighting::Cartesian,
        }
    }
}

/// Per-mode and aggregate vibronic quantities for one emitter in one host.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibronicReport {
    pub frequencies_cm1: Vec<f64>,
    /// Whether each isolated mode enters the sums.
    pub included: Vec<bool>,
    pub g: Vec<f64>,
    pub projection_entropy: Vec<f64>,
    pub huang_rhys: Option<Vec<f64>>,
    pub weighted_hr: Option<Vec<f64>>,
    pub svc: f64,
    pub sum_g: f64,
    pub sum_weighted_hr: Option<f64>,
    pub direct_fc: DirectFc,
}

/// Emitter geometry pair for Huang-Rhys factors.
pub struct GeometryPair<'a> {
    pub ground: &'a [Vector3<f64>],
    pub excited: &'a [Vector3<f64>],
}

/// Assembles every vibronic quantity. Rigid-body and imaginary isolated
/// modes get g_i = 0 and S_k = 0 so they drop out of every sum; the
/// direct Franck-Condon metric always uses the full bases.
pub fn vibronic_report(
    isolated: &NormalModeSet,
    embedded: &NormalModeSet,
    emitter_atoms: &[usize],
    forces: &[Vector3<f64>],
    geometries: Option<GeometryPair<'_>>,
    opts: &VibronicOptions,
) -> Result<VibronicReport, VibronicError> {
    let included = isolated.vibrational_mask(opts.frequency_floor_cm1);
    let rho = mode_overlap_matrix(isolated, embedded, emitter_atoms)?;
    let sp = rho.entropies();
    let g: Vec<f64> = force_projection(forces, isolated, opts.force_weighting)?
        .into_iter()
        .zip(&included)
        .map(|(x, &inc)| if inc { x } else { 0.0 })
        .collect();
    let svc = vibronic_coupling_entropy(&g, &sp)?;
    let direct_fc = direct_fc_metric(forces, isolated, embedded, emitter_atoms)?;
    let (hr, whr) = match geometries {
        Some(pair) => {
            let s = huang_rhys(pair.ground, pair.excited, isolated, opts.frequency_floor_cm1)?;
            let w = weighted_hr(&s, isolated)?;
            (Some(s), Some(w))
        }
        None => (None, None),
    };
    Ok(VibronicReport {
        frequencies_cm1: isolated.frequencies_cm1(),
        included,
        sum_g: g.iter().sum(),
        g,
        projection_entropy: sp,
        huang_rhys: hr,
        sum_weighted_hr: whr.as_ref().map(|w| w.sum),
        weighted_hr: whr.map(|w| w.per_mode),
        svc,
        direct_fc,
    })
}

/// Forces at `displaced` on the harmonic surface with Hessian `hessian`
/// (eV/Å²) and minimum `reference`: F = −K (R − R_ref).
pub fn harmonic_forces(
    hessian: &DMatrix<f64>,
    reference: &[Vector3<f64>],
    displaced: &[Vector3<f64>],
) -> Vec<Vector3<f64>> {
    let d = nalgebra::DVector::from_iterator(
        3 * reference.len(),
        displaced.iter().zip(reference).flat_map(|(a, b)| (a - b).iter().copied().collect::<Vec<_>>()),
    );
    let f = -(hessian * d);
    (0..reference.len()).map(|a| Vector3::new(f[3 * a], f[3 * a + 1], f[3 * a + 2])).collect()
}
