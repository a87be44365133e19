//! Generators shared by the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;
use spescreen_core::chem::{Atom, Bond, BondOrder, MolecularGraph};
use spescreen_core::Element;

/// Random saturated C/N/O graphs: a random tree plus a few ring closures,
/// with implicit hydrogens filling each atom's valence.
pub fn random_graph() -> impl Strategy<Value = MolecularGraph> {
    (2usize..24, proptest::collection::vec((0u32..1000, 0u32..3), 24), proptest::collection::vec((0usize..24, 0usize..24), 0..4)).prop_map(
        |(n, picks, closures)| {
            let caps = [4u8, 3, 2];
            let elements = [Element::C, Element::N, Element::O];
            let mut kinds = vec![0usize; n];
            let mut used = vec![0u8; n];
            let mut bonds = Vec::new();
            for i in 0..n {
                kinds[i] = picks[i].1 as usize;
                if i == 0 {
                    continue;
                }
                // attach to an earlier atom with free valence, carbon if none is left
                let free: Vec<usize> = (0..i).filter(|&p| used[p] < caps[kinds[p]]).collect();
                let parent = if free.is_empty() {
                    kinds[i] = 0;
                    i - 1
                } else {
                    free[picks[i].0 as usize % free.len()]
                };
                if used[parent] >= caps[kinds[parent]] {
                    kinds[parent] = 0;
                }
                used[parent] += 1;
                used[i] += 1;
                bonds.push((parent, i));
            }
            for (a, b) in closures {
                let (a, b) = (a % n, b % n);
                let exists = bonds.iter().any(|&(x, y)| (x, y) == (a.min(b), a.max(b)) || (x, y) == (a.max(b), a.min(b)));
                if a != b && !exists && used[a] < caps[kinds[a]] && used[b] < caps[kinds[b]] {
                    used[a] += 1;
                    used[b] += 1;
                    bonds.push((a, b));
                }
            }
            let atoms = (0..n)
                .map(|i| {
                    let mut at = Atom::new(elements[kinds[i]]);
                    at.implicit_h = caps[kinds[i]].saturating_sub(used[i]);
                    at
                })
                .collect();
            let bonds = bonds.into_iter().map(|(a, b)| Bond { a, b, order: BondOrder::Single, stereo: None }).collect();
            MolecularGraph::new(atoms, bonds, "")
        },
    )
}
