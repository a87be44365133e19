use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use super::{Potential, PotentialError};
use crate::structure::AtomicStructure;

/// Energies, forces and optionally a Hessian computed elsewhere for one
/// fixed geometry.
///
/// JSON keys: `n_atoms`, `energy_eV`, `forces_eV_per_A` (N×3) and optional
/// `hessian_eV_per_A2` (3N×3N, row-major nested rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalData {
    pub n_atoms: usize,
    #[serde(rename = "energy_eV")]
    pub energy_ev: f64,
    #[serde(rename = "forces_eV_per_A")]
    pub forces: Vec<[f64; 3]>,
    #[serde(rename = "hessian_eV_per_A2", default, skip_serializing_if = "Option::is_none")]
    pub hessian: Option<Vec<Vec<f64>>>,
}

impl ExternalData {
    pub fn from_json(text: &str) -> Result<Self, PotentialError> {
        let data: ExternalData =
            serde_json::from_str(text).map_err(|e| PotentialError::MalformedExternal(e.to_string()))?;
        data.validate()?;
        Ok(data)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, PotentialError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| PotentialError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        let bad = |m: String| Err(PotentialError::MalformedExternal(m));
        if self.forces.len() != self.n_atoms {
            return bad(format!("{} force rows for {} atoms", self.forces.len(), self.n_atoms));
        }
        if !self.energy_ev.is_finite() || self.forces.iter().flatten().any(|v| !v.is_finite()) {
            return bad("non-finite energy or force".into());
        }
        if let Some(h) = &self.hessian {
            let m = 3 * self.n_atoms;
            if h.len() != m || h.iter().any(|row| row.len() != m) {
                return bad(format!("hessian must be {m}x{m}"));
            }
        }
        Ok(())
    }

    pub fn check_atoms(&self, n: usize) -> Result<(), PotentialError> {
        if n != self.n_atoms {
            return Err(PotentialError::AtomCountMismatch {
                expected: self.n_atoms,
                got: n,
            });
        }
        Ok(())
    }

    pub fn forces_vec(&self) -> Vec<Vector3<f64>> {
        self.forces.iter().map(|f| Vector3::from(*f)).collect()
    }

    pub fn hessian_matrix(&self) -> Option<DMatrix<f64>> {
        self.hessian.as_ref().map(|h| {
            let m = h.len();
            DMatrix::from_fn(m, m, |i, j| h[i][j])
        })
    }
}

impl Potential for ExternalData {
    fn energy_and_forces(
        &self,
        s: &AtomicStructure,
    ) -> Result<(f64, Vec<Vector3<f64>>), PotentialError> {
        self.check_atoms(s.len())?;
        Ok((self.energy_ev, self.forces_vec()))
    }

    fn provided_hessian(&self, s: &AtomicStructure) -> Option<DMatrix<f64>> {
        (s.len() == self.n_atoms).then(|| self.hessian_matrix()).flatten()
    }

    fn is_static(&self) -> bool {
        true
    }
}
