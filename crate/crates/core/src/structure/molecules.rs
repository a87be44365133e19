use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::neighbors::{natural_cutoffs, neighbor_list};
use super::AtomicStructure;

/// Molecule id of every atom; ids are contiguous and numbered in order of
/// first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoleculeLabels {
    pub labels: Vec<usize>,
    pub count: usize,
}

impl MoleculeLabels {
    /// Atom indices of each molecule, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.count];
        for &l in &self.labels {
            out[l] += 1;
        }
        out
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Tolerance added to every covalent pair cutoff when grouping atoms into
/// molecules (Å).
pub const BOND_SKIN: f64 = 0.3;

/// Connected components of the covalent neighbor graph: atoms are bonded
/// when closer than the sum of their covalent radii plus [`BOND_SKIN`].
pub fn identify_molecules(structure: &AtomicStructure) -> MoleculeLabels {
    let cutoffs: Vec<f64> = natural_cutoffs(structure, &BTreeMap::new())
        .into_iter()
        .map(|c| c + BOND_SKIN / 2.0)
        .collect();
    identify_molecules_with(structure, &cutoffs)
}

/// Connected components of the neighbor graph for explicit per-atom cutoffs.
pub fn identify_molecules_with(structure: &AtomicStructure, cutoffs: &[f64]) -> MoleculeLabels {
    let nl = neighbor_list(structure, cutoffs);
    let n = structure.len();
    let mut ds = DisjointSet::new(n);
    for (i, j) in nl.pairs() {
        ds.union(i, j);
    }
    let mut id_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            let r = ds.find(i);
            let next = id_of_root.len();
            *id_of_root.entry(r).or_insert(next)
        })
        .collect();
    MoleculeLabels {
        count: id_of_root.len(),
        labels,
    }
}
