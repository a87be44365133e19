//! Binary circular (Morgan-type) fingerprints.
//!
//! Atom environments of growing radius are hashed with 64-bit FNV-1a over
//! little-endian words and folded into `nbits` by `hash % nbits`. Bit
//! positions are stable across runs and platforms but are not those of
//! other toolkits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::MolecularGraph;

pub const DEFAULT_NBITS: usize = 1024;
pub const DEFAULT_RADIUS: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FingerprintError {
    #[error("nbits must be a power of two >= 8, got {0}")]
    InvalidLength(usize),
    #[error("bit index {index} out of range for {nbits} bits")]
    OutOfRange { index: usize, nbits: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
    radius: u32,
}

impl Fingerprint {
    pub fn empty(nbits: usize, radius: u32) -> Result<Self, FingerprintError> {
        if nbits < 8 || !nbits.is_power_of_two() {
            return Err(FingerprintError::InvalidLength(nbits));
        }
        Ok(Fingerprint {
            words: vec![0; nbits.div_ceil(64)],
            nbits,
            radius,
        })
    }

    pub fn from_indices(
        nbits: usize,
        radius: u32,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self, FingerprintError> {
        let mut fp = Fingerprint::empty(nbits, radius)?;
        for index in indices {
            if index >= nbits {
                return Err(FingerprintError::OutOfRange { index, nbits });
            }
            fp.set(index);
        }
        Ok(fp)
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.nbits && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Popcount of the bitwise AND; lengths must already agree.
    pub fn intersection_count(&self, other: &Fingerprint) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(|&i| self.get(i))
    }

    /// Bit string, most significant index last.
    pub fn to_bit_string(&self) -> String {
        (0..self.nbits).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over the little-endian bytes of `words`.
pub fn fnv1a_words(words: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for w in words {
        for byte in w.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

fn initial_invariants(graph: &MolecularGraph) -> Vec<u64> {
    let ring = graph.ring_atoms();
    (0..graph.atom_count())
        .map(|i| {
            let a = &graph.atoms[i];
            fnv1a_words(&[
                u64::from(a.element.atomic_number()),
                graph.degree(i) as u64,
                u64::from(a.total_h()),
                a.charge as i64 as u64,
                u64::from(ring[i]),
            ])
        })
        .collect()
}

/// Identifier of every distinct atom environment up to `radius`, in
/// generation order. Environments covering the same bond set as an earlier
/// one are dropped, keeping the smaller identifier on ties within a round.
pub fn environment_ids(graph: &MolecularGraph, radius: u32) -> Vec<u64> {
    let n = graph.atom_count();
    let nb = graph.bonds.len();
    let mut ids = initial_invariants(graph);
    let mut out = ids.clone();
    let mut env: Vec<Vec<bool>> = vec![vec![false; nb]; n];
    let mut seen: std::collections::HashSet<Vec<bool>> = std::collections::HashSet::new();

    for r in 1..=radius {
        let mut round: Vec<(Vec<bool>, u64)> = Vec::with_capacity(n);
        let mut next_ids = ids.clone();
        let mut next_env = env.clone();
        for i in 0..n {
            if graph.degree(i) == 0 {
                continue;
            }
            let mut nbrs: Vec<(u64, u64)> = graph
                .neighbors(i)
                .iter()
                .map(|&(j, k)| (graph.bonds[k].order.code(), ids[j]))
                .collect();
            nbrs.sort_unstable();
            let mut words = vec![u64::from(r), ids[i]];
            for (code, id) in nbrs {
                words.push(code);
                words.push(id);
            }
            let h = fnv1a_words(&words);
            next_ids[i] = h;
            let cover = &mut next_env[i];
            for &(j, k) in graph.neighbors(i) {
                cover[k] = true;
                for (c, &e) in cover.iter_mut().zip(&env[j]) {
                    *c |= e;
                }
            }
            round.push((cover.clone(), h));
        }
        round.sort();
        for (cover, h) in round {
            if seen.insert(cover) {
                out.push(h);
            }
        }
        ids = next_ids;
        env = next_env;
    }
    out
}

/// Circular fingerprint of `graph` with environments up to `radius` bonds.
pub fn morgan_fingerprint(
    graph: &MolecularGraph,
    radius: u32,
    nbits: usize,
) -> Result<Fingerprint, FingerprintError> {
    let mut fp = Fingerprint::empty(nbits, radius)?;
    for id in environment_ids(graph, radius) {
        fp.set((id % nbits as u64) as usize);
    }
    Ok(fp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::smiles::parse_smiles;

    fn fp(s: &str, r: u32) -> Fingerprint {
        morgan_fingerprint(&parse_smiles(s).unwrap(), r, 1024).unwrap()
    }

    #[test]
    fn fnv_reference_value() {
        // FNV-1a of eight zero bytes
        let mut h = FNV_OFFSET;
        for _ in 0..8 {
            h = h.wrapping_mul(FNV_PRIME);
        }
        assert_eq!(fnv1a_words(&[0]), h);
        assert_eq!(fnv1a_words(&[]), FNV_OFFSET);
    }

    #[test]
    fn methane_radius_zero_single_bit() {
        assert_eq!(fp("C", 0).popcount(), 1);
    }

    #[test]
    fn relabeled_ethanol_identical() {
        assert_eq!(fp("CCO", 2), fp("OCC", 2));
    }

    #[test]
    fn benzene_environments_collapse() {
        let g = parse_smiles("c1ccccc1").unwrap();
        let mut ids = environment_ids(&g, 2);
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 3);
        assert!(fp("c1ccccc1", 2).popcount() <= 3);
    }

    #[test]
    fn invalid_lengths_rejected() {
        assert!(Fingerprint::empty(1000, 2).is_err());
        assert!(Fingerprint::empty(4, 2).is_err());
        assert!(Fingerprint::from_indices(8, 0, [8]).is_err());
    }

    #[test]
    fn bit_accessors() {
        let f = Fingerprint::from_indices(64, 0, [0, 5, 63]).unwrap();
        assert_eq!(f.popcount(), 3);
        assert_eq!(f.ones().collect::<Vec<_>>(), vec![0, 5, 63]);
        assert!(f.get(5) && !f.get(6) && !f.get(64));
        assert_eq!(f.to_bit_string().len(), 64);
    }
}
