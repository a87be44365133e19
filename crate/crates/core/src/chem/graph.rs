use serde::{Deserialize, Serialize};

use crate::elements::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the valence sum; aromatic bonds count as one.
    pub fn valence(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 12,
        }
    }
}

/// Directional (`/`, `\`) bond marker, kept for provenance only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BondStereo {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    /// Hydrogens written inside a bracket atom.
    pub explicit_h: u8,
    /// Hydrogens added by valence completion (organic-subset atoms only).
    pub implicit_h: u8,
    pub aromatic: bool,
    pub isotope: Option<u16>,
    /// Raw chirality marker (`@`, `@@`, `@TH1`, ...) if one was written.
    pub chirality: Option<String>,
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Atom {
            element,
            charge: 0,
            explicit_h: 0,
            implicit_h: 0,
            aromatic: false,
            isotope: None,
            chirality: None,
        }
    }

    pub fn total_h(&self) -> u8 {
        self.explicit_h + self.implicit_h
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub stereo: Option<BondStereo>,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// Heavy-atom graph with hydrogens folded into per-atom counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolecularGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    /// Text the graph was parsed from (empty for programmatic graphs).
    pub source: String,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl MolecularGraph {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>, source: impl Into<String>) -> Self {
        let mut g = MolecularGraph {
            atoms,
            bonds,
            source: source.into(),
            adjacency: Vec::new(),
        };
        g.rebuild_adjacency();
        g
    }

    pub(crate) fn rebuild_adjacency(&mut self) {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for (k, b) in self.bonds.iter().enumerate() {
            adj[b.a].push((b.b, k));
            adj[b.b].push((b.a, k));
        }
        self.adjacency = adj;
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `(neighbor, bond index)` pairs of an atom.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency
            .get(a)?
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, k)| k)
    }

    /// Sum of bond valences around an atom.
    pub fn bond_valence_sum(&self, atom: usize) -> u32 {
        self.adjacency[atom]
            .iter()
            .map(|&(_, k)| self.bonds[k].order.valence())
            .sum()
    }

    /// Heavy-atom count plus hydrogens, by element symbol (Hill-ish order).
    pub fn formula(&self) -> String {
        let mut counts = std::collections::BTreeMap::new();
        let mut h = 0usize;
        for a in &self.atoms {
            *counts.entry(a.element.symbol()).or_insert(0usize) += 1;
            h += a.total_h() as usize;
        }
        if h > 0 {
            *counts.entry("H").or_insert(0) += h;
        }
        let mut out = String::new();
        let mut push = |sym: &str, n: usize| {
            out.push_str(sym);
            if n > 1 {
                out.push_str(&n.to_string());
            }
        };
        if let Some(&n) = counts.get("C") {
            push("C", n);
            if let Some(&nh) = counts.get("H") {
                push("H", nh);
            }
        }
        for (sym, &n) in &counts {
            if counts.contains_key("C") && (*sym == "C" || *sym == "H") {
                continue;
            }
            push(sym, n);
        }
        out
    }

    /// Bonds that lie on at least one cycle (i.e. are not bridges).
    pub fn ring_bonds(&self) -> Vec<bool> {
        let n = self.atoms.len();
        let mut in_ring = vec![true; self.bonds.len()];
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut timer = 0usize;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // iterative Tarjan bridge search: (atom, parent bond, next neighbor slot)
            let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(top) = stack.last_mut() {
                let (v, parent) = (top.0, top.1);
                if top.2 < self.adjacency[v].len() {
                    let (w, k) = self.adjacency[v][top.2];
                    top.2 += 1;
                    if Some(k) == parent {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, Some(k), 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let (Some(&(u, _, _)), Some(k)) = (stack.last(), parent) {
                        low[u] = low[u].min(low[v]);
                        if low[v] > disc[u] {
                            in_ring[k] = false;
                        }
                    }
                }
            }
        }
        in_ring
    }

    /// Atoms that carry at least one ring bond.
    pub fn ring_atoms(&self) -> Vec<bool> {
        let rb = self.ring_bonds();
        let mut out = vec![false; self.atoms.len()];
        for (k, b) in self.bonds.iter().enumerate() {
            if rb[k] {
                out[b.a] = true;
                out[b.b] = true;
            }
        }
        out
    }

    /// Number of independent cycles (cyclomatic number).
    pub fn ring_count(&self) -> usize {
        let components = self.connected_components();
        (self.bonds.len() + components).saturating_sub(self.atoms.len())
    }

    pub fn connected_components(&self) -> usize {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Returns a copy with atoms relabeled so that old atom `i` becomes
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> MolecularGraph {
        assert_eq!(perm.len(), self.atoms.len());
        let mut atoms = vec![None; self.atoms.len()];
        for (i, a) in self.atoms.iter().enumerate() {
            atoms[perm[i]] = Some(a.clone());
        }
        let atoms = atoms.into_iter().map(|a| a.expect("perm is a permutation")).collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                ..b.clone()
            })
            .collect();
        MolecularGraph::new(atoms, bonds, self.source.clone())
    }
}
