use std::collections::BTreeSet;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lj::LjTable;
use super::{Potential, PotentialError};
use crate::structure::{identify_molecules, AtomicStructure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spring {
    pub i: usize,
    pub j: usize,
    /// eV/Å²
    pub k: f64,
    /// Å
    pub r0: f64,
}

/// Harmonic springs inside molecules plus pair interactions between atoms
/// of different molecules.
#[derive(Debug, Clone)]
pub struct HarmonicToy {
    pub springs: Vec<Spring>,
    /// Molecule id per atom; only atoms with different ids interact through
    /// the pair term.
    pub molecule: Vec<usize>,
    pub pairs: LjTable,
    pub repulsive_only: bool,
}

impl HarmonicToy {
    pub fn new(
        springs: Vec<Spring>,
        molecule: Vec<usize>,
        pairs: LjTable,
        repulsive_only: bool,
    ) -> Result<Self, PotentialError> {
        for s in &springs {
            if !(s.k > 0.0 && s.r0 > 0.0) {
                return Err(PotentialError::InvalidParameter(format!(
                    "spring {}-{} needs k > 0 and r0 > 0",
                    s.i, s.j
                )));
            }
            if s.i == s.j || s.i >= molecule.len() || s.j >= molecule.len() {
                return Err(PotentialError::InvalidParameter(format!(
                    "spring {}-{} has invalid atom indices",
                    s.i, s.j
                )));
            }
        }
        Ok(HarmonicToy {
            springs,
            molecule,
            pairs,
            repulsive_only,
        })
    }

    /// Springs on every covalent bond (and optionally every 1-3 pair) of
    /// `reference`, with equilibrium lengths taken from it, so the reference
    /// is an intramolecular minimum.
    pub fn from_reference(
        reference: &AtomicStructure,
        bond_k: f64,
        angle_k: f64,
        pairs: LjTable,
        repulsive_only: bool,
    ) -> Result<Self, PotentialError> {
        let mut cluster = reference.clone();
        cluster.pbc = [false; 3];
        let labels = identify_molecules(&cluster);
        let n = reference.len();
        let cut: Vec<f64> = reference
            .elements
            .iter()
            .map(|e| e.covalent_radius() + crate::structure::BOND_SKIN / 2.0)
            .collect();
        let nl = crate::structure::neighbor_list(&cluster, &cut);
        let bonds: BTreeSet<(usize, usize)> = nl.pairs().into_iter().collect();
        let dist = |i: usize, j: usize| (reference.positions[i] - reference.positions[j]).norm();
        let mut springs: Vec<Spring> = bonds
            .iter()
            .map(|&(i, j)| Spring { i, j, k: bond_k, r0: dist(i, j) })
            .collect();
        if angle_k > 0.0 {
            let mut seen = BTreeSet::new();
            for center in 0..n {
                let nbrs: Vec<usize> = nl.neighbors[center].iter().map(|x| x.index).collect();
                for (a, &i) in nbrs.iter().enumerate() {
                    for &j in &nbrs[a + 1..] {
                        let key = (i.min(j), i.max(j));
                        if !bonds.contains(&key) && seen.insert(key) {
                            springs.push(Spring { i: key.0, j: key.1, k: angle_k, r0: dist(key.0, key.1) });
                        }
                    }
                }
            }
        }
        HarmonicToy::new(springs, labels.labels, pairs, repulsive_only)
    }
}

impl Potential for HarmonicToy {
    fn energy_and_forces(
        &self,
        s: &AtomicStructure,
    ) -> Result<(f64, Vec<Vector3<f64>>), PotentialError> {
        let n = s.len();
        if self.molecule.len() != n {
            return Err(PotentialError::AtomCountMismatch {
                expected: self.molecule.len(),
                got: n,
            });
        }
        let pm = self.pairs.resolve(&s.elements)?;
        let rows: Vec<(f64, Vector3<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut e = 0.0;
                let mut f = Vector3::zeros();
                for j in 0..n {
                    if j == i || self.molecule[j] == self.molecule[i] {
                        continue;
                    }
                    let d = s.positions[i] - s.positions[j];
                    let r = d.norm();
                    let p = pm.get(i, j);
                    let (eij, de) = if self.repulsive_only { p.repulsive(r) } else { p.full(r) };
                    e += 0.5 * eij;
                    f -= d * (de / r);
                }
                (e, f)
            })
            .collect();
        let mut energy: f64 = rows.iter().map(|r| r.0).sum();
        let mut forces: Vec<Vector3<f64>> = rows.into_iter().map(|r| r.1).collect();
        for sp in &self.springs {
            let d = s.positions[sp.i] - s.positions[sp.j];
            let r = d.norm();
            let x = r - sp.r0;
            energy += 0.5 * sp.k * x * x;
            let g = d * (sp.k * x / r);
            forces[sp.i] -= g;
            forces[sp.j] += g;
        }
        Ok((energy, forces))
    }
}
