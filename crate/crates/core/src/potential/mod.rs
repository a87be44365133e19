//! Energy and force providers, relaxation and finite-difference Hessians.
//!
//! Evaluators treat structures as finite clusters: cells are carried along
//! but never used for periodic interactions, and relaxation keeps the cell
//! fixed.

pub mod external;
pub mod harmonic;
pub mod hessian;
pub mod lj;
pub mod relax;

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elements::Element;
use crate::structure::AtomicStructure;

pub use external::ExternalData;
pub use harmonic::HarmonicToy;
pub use hessian::{hessian_finite_difference, FdHessian, DEFAULT_FD_STEP};
pub use lj::{LennardJones, LjParams, LjTable};
pub use relax::{relax, RelaxOptions, RelaxationResult};

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("no pair parameters for {0}-{1}")]
    MissingParameter(Element, Element),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("external data describes {expected} atoms, structure has {got}")]
    AtomCountMismatch { expected: usize, got: usize },
    #[error("external data is malformed: {0}")]
    MalformedExternal(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("energy became non-finite after {} accepted steps", .last.iterations)]
    Diverged { last: Box<RelaxationResult> },
}

impl PotentialError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, PotentialError::Diverged { .. })
    }
}

/// A stateless energy/force evaluator (eV, eV/Å).
pub trait Potential: Send + Sync {
    fn energy_and_forces(
        &self,
        structure: &AtomicStructure,
    ) -> Result<(f64, Vec<Vector3<f64>>), PotentialError>;

    fn energy(&self, structure: &AtomicStructure) -> Result<f64, PotentialError> {
        Ok(self.energy_and_forces(structure)?.0)
    }

    fn forces(&self, structure: &AtomicStructure) -> Result<Vec<Vector3<f64>>, PotentialError> {
        Ok(self.energy_and_forces(structure)?.1)
    }

    /// A Hessian (eV/Å²) supplied directly by the provider, if any.
    fn provided_hessian(&self, _structure: &AtomicStructure) -> Option<DMatrix<f64>> {
        None
    }

    /// True if results do not depend on the positions (tabulated data).
    fn is_static(&self) -> bool {
        false
    }
}

/// Largest per-atom force norm.
pub fn max_force(forces: &[Vector3<f64>]) -> f64 {
    forces.iter().map(|f| f.norm()).fold(0.0, f64::max)
}

/// Serializable description of a potential. Topology-dependent kinds are
/// bound to a structure by [`PotentialSpec::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    LennardJones {
        /// Per-element (ε eV, σ Å), combined by Lorentz-Berthelot rules.
        elements: BTreeMap<Element, LjParams>,
        /// Explicit pair overrides, keyed "A-B".
        #[serde(default)]
        pairs: BTreeMap<String, LjParams>,
    },
    HarmonicToy {
        /// Spring constant for covalent bonds (eV/Å²).
        bond_k: f64,
        /// Spring constant for 1-3 pairs (eV/Å²); 0 disables them.
        #[serde(default)]
        angle_k: f64,
        /// Intermolecular pair parameters.
        elements: BTreeMap<Element, LjParams>,
        #[serde(default)]
        pairs: BTreeMap<String, LjParams>,
        /// Keep only the repulsive r⁻¹² part between molecules.
        #[serde(default)]
        repulsive_only: bool,
    },
    External {
        path: PathBuf,
    },
}

impl PotentialSpec {
    /// Potential for `structure`; the harmonic toy takes its bonds and
    /// equilibrium lengths from this geometry.
    pub fn build(&self, structure: &AtomicStructure) -> Result<Box<dyn Potential>, PotentialError> {
        match self {
            PotentialSpec::LennardJones { elements, pairs } => {
                Ok(Box::new(LennardJones::new(LjTable::new(elements.clone(), pairs)?)))
            }
            PotentialSpec::HarmonicToy {
                bond_k,
                angle_k,
                elements,
                pairs,
                repulsive_only,
            } => Ok(Box::new(HarmonicToy::from_reference(
                structure,
                *bond_k,
                *angle_k,
                LjTable::new(elements.clone(), pairs)?,
                *repulsive_only,
            )?)),
            PotentialSpec::External { path } => {
                let data = ExternalData::read(path)?;
                data.check_atoms(structure.len())?;
                Ok(Box::new(data))
            }
        }
    }
}
