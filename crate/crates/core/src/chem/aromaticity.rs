//! Hückel aromaticity over small rings.
//!
//! Each simple ring of up to [`MAX_RING`] atoms is tested for 4n+2 π
//! electrons; rings that fail alone are retried as a union with one
//! edge-fused neighbor ring (azulene-type systems). Hydrogen counts are
//! fixed before perception, so only flags and bond orders change.

use std::collections::BTreeSet;

use super::graph::{BondOrder, MolecularGraph};

const MAX_RING: usize = 8;

/// Enumerates simple cycles of length 3..=`max_len`, each as an atom list
/// starting at its smallest index.
pub fn small_rings(graph: &MolecularGraph, max_len: usize) -> Vec<Vec<usize>> {
    let mut rings = Vec::new();
    let n = graph.atom_count();
    let mut path = Vec::with_capacity(max_len);
    let mut on_path = vec![false; n];
    for start in 0..n {
        path.clear();
        path.push(start);
        on_path[start] = true;
        extend(graph, start, max_len, &mut path, &mut on_path, &mut rings);
        on_path[start] = false;
    }
    rings
}

fn extend(
    graph: &MolecularGraph,
    start: usize,
    max_len: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    rings: &mut Vec<Vec<usize>>,
) {
    let last = *path.last().unwrap();
    for &(next, _) in graph.neighbors(last) {
        if next == start && path.len() >= 3 {
            // each cycle is found in both directions; keep one
            if path[1] < path[path.len() - 1] {
                rings.push(path.clone());
            }
            continue;
        }
        if next <= start || on_path[next] || path.len() == max_len {
            continue;
        }
        on_path[next] = true;
        path.push(next);
        extend(graph, start, max_len, path, on_path, rings);
        path.pop();
        on_path[next] = false;
    }
}

/// π-electron contribution of `atom` to a ring, or `None` if the atom
/// cannot be part of a conjugated ring.
fn pi_electrons(graph: &MolecularGraph, atom: usize, ring_atom: &[bool]) -> Option<u32> {
    let a = &graph.atoms[atom];
    let symbol = a.element.symbol();
    let degree = graph.degree(atom) as u32 + a.total_h() as u32;
    if a.aromatic {
        return Some(match symbol {
            "O" | "S" | "Se" => 2,
            "N" | "P" if degree == 3 && a.charge == 0 => 2,
            "B" => 0,
            _ => 1,
        });
    }
    let mut exocyclic_multiple = false;
    for &(nbr, k) in graph.neighbors(atom) {
        match graph.bonds[k].order {
            BondOrder::Double => {
                if ring_atom[nbr] {
                    return Some(1);
                }
                exocyclic_multiple = true;
            }
            BondOrder::Triple => return None,
            _ => {}
        }
    }
    if exocyclic_multiple {
        return Some(0);
    }
    match symbol {
        "N" | "P" if degree == 3 => Some(2),
        "O" | "S" | "Se" if degree == 2 => Some(2),
        "C" if a.charge == -1 && degree == 3 => Some(2),
        "C" if a.charge == 1 && degree == 3 => Some(0),
        "B" if degree == 3 => Some(0),
        _ => None,
    }
}

fn is_huckel(electrons: u32) -> bool {
    electrons >= 2 && (electrons - 2).is_multiple_of(4)
}

/// π-electron count of a candidate ring. A ring made only of lone-pair
/// donors has no π bond to conjugate with and is rejected.
fn ring_electrons<'a>(
    graph: &MolecularGraph,
    atoms: impl IntoIterator<Item = &'a usize>,
    ring_atom: &[bool],
) -> Option<u32> {
    let counts: Vec<u32> = atoms
        .into_iter()
        .map(|&a| pi_electrons(graph, a, ring_atom))
        .collect::<Option<_>>()?;
    counts.iter().any(|&e| e != 2).then(|| counts.iter().sum())
}

fn ring_bonds_of(graph: &MolecularGraph, ring: &[usize]) -> Vec<usize> {
    (0..ring.len())
        .filter_map(|i| graph.bond_between(ring[i], ring[(i + 1) % ring.len()]))
        .collect()
}

/// Flags aromatic atoms and converts ring bonds of aromatic rings to
/// [`BondOrder::Aromatic`].
pub fn perceive_aromaticity(graph: &mut MolecularGraph) {
    let rings = small_rings(graph, MAX_RING);
    if rings.is_empty() {
        return;
    }
    let ring_atom = graph.ring_atoms();
    let mut aromatic_rings: Vec<usize> = Vec::new();
    let mut failed: Vec<usize> = Vec::new();
    for (r, ring) in rings.iter().enumerate() {
        match ring_electrons(graph, ring, &ring_atom) {
            Some(e) if is_huckel(e) => aromatic_rings.push(r),
            Some(_) => failed.push(r),
            None => {}
        }
    }

    let bond_sets: Vec<BTreeSet<usize>> = rings
        .iter()
        .map(|r| ring_bonds_of(graph, r).into_iter().collect())
        .collect();
    let mut extra_bonds: BTreeSet<usize> = BTreeSet::new();
    for (i, &r1) in failed.iter().enumerate() {
        for &r2 in &failed[i + 1..] {
            let shared = bond_sets[r1].intersection(&bond_sets[r2]).count();
            if shared != 1 {
                continue;
            }
            let union: BTreeSet<usize> = rings[r1].iter().chain(&rings[r2]).copied().collect();
            if let Some(e) = ring_electrons(graph, &union, &ring_atom) {
                if is_huckel(e) {
                    extra_bonds.extend(bond_sets[r1].symmetric_difference(&bond_sets[r2]));
                    extra_bonds.extend(bond_sets[r1].intersection(&bond_sets[r2]));
                }
            }
        }
    }

    let mut aromatic_bonds: BTreeSet<usize> = extra_bonds;
    for &r in &aromatic_rings {
        aromatic_bonds.extend(&bond_sets[r]);
    }
    for &k in &aromatic_bonds {
        let (a, b) = (graph.bonds[k].a, graph.bonds[k].b);
        graph.atoms[a].aromatic = true;
        graph.atoms[b].aromatic = true;
        graph.bonds[k].order = BondOrder::Aromatic;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::smiles::{parse_smiles, parse_smiles_raw};

    #[test]
    fn ring_enumeration() {
        let g = parse_smiles_raw("c1ccc2ccccc2c1").unwrap();
        let rings = small_rings(&g, 8);
        assert_eq!(rings.len(), 2);
        assert!(rings.iter().all(|r| r.len() == 6));
    }

    #[test]
    fn kekule_benzene_becomes_aromatic() {
        let g = parse_smiles("C1=CC=CC=C1").unwrap();
        assert!(g.atoms.iter().all(|a| a.aromatic && a.total_h() == 1));
        assert!(g.bonds.iter().all(|b| b.order == BondOrder::Aromatic));
    }

    #[test]
    fn kekule_anthracene_fused() {
        let g = parse_smiles("C1=CC=C2C=C3C=CC=CC3=CC2=C1").unwrap();
        assert!(g.atoms.iter().all(|a| a.aromatic));
        assert_eq!(g.bonds.iter().filter(|b| b.order == BondOrder::Aromatic).count(), 16);
    }

    #[test]
    fn lone_pair_only_rings_stay_aliphatic() {
        for smiles in ["C1N2N1N2", "N1NN1", "C1NNN1"] {
            let g = parse_smiles(smiles).unwrap();
            assert!(g.atoms.iter().all(|a| !a.aromatic), "{smiles}");
        }
        assert!(parse_smiles("c1cc[nH]c1").unwrap().atoms.iter().all(|a| a.aromatic));
    }

    #[test]
    fn non_aromatic_rings_untouched() {
        let g = parse_smiles("C1CCCCC1").unwrap();
        assert!(g.atoms.iter().all(|a| !a.aromatic));
        let g = parse_smiles("C1=CCC=C1").unwrap(); // cyclopentadiene
        assert!(g.atoms.iter().all(|a| !a.aromatic));
        let g = parse_smiles("C1=CC=CC=CC=C1").unwrap(); // cyclooctatetraene
        assert!(g.atoms.iter().all(|a| !a.aromatic));
    }

    #[test]
    fn heteroaromatics() {
        let g = parse_smiles("C1=CSC=C1").unwrap();
        assert!(g.atoms.iter().all(|a| a.aromatic));
        let g = parse_smiles("C1=CNC=C1").unwrap();
        assert!(g.atoms.iter().all(|a| a.aromatic));
        assert_eq!(g.formula(), "C4H5N");
    }

    #[test]
    fn azulene_via_fused_union() {
        let g = parse_smiles("C1=CC=C2C=CC=C2C=C1").unwrap();
        assert!(g.atoms.iter().all(|a| a.aromatic));
    }

    #[test]
    fn biphenyl_link_stays_single() {
        let g = parse_smiles("C1=CC=C(C=C1)C1=CC=CC=C1").unwrap();
        assert_eq!(g.bonds.iter().filter(|b| b.order == BondOrder::Single).count(), 1);
    }
}
