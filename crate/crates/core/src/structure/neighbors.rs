//! Cutoff neighbor lists with periodic images.
//!
//! Atoms are wrapped into the cell along periodic axes, image copies within
//! the cutoff shell of the cell are generated, and candidate pairs come from
//! a Cartesian bin grid with bin width equal to the largest pair cutoff.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::AtomicStructure;
use crate::elements::Element;

/// Covalent radius per atom, with optional per-element overrides.
pub fn natural_cutoffs(structure: &AtomicStructure, overrides: &BTreeMap<Element, f64>) -> Vec<f64> {
    structure
        .elements
        .iter()
        .map(|e| overrides.get(e).copied().unwrap_or_else(|| e.covalent_radius()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Neighbor {
    pub index: usize,
    /// Lattice translation (in cell vectors) applied to the neighbor.
    pub shift: [i32; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborList {
    /// Sorted neighbors of each atom.
    pub neighbors: Vec<Vec<Neighbor>>,
}

impl NeighborList {
    /// Unique unordered atom pairs `(i, j)` with `i < j`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |n| n.index > i).map(move |n| (i, n.index)))
            .collect();
        out.dedup();
        out
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].iter().any(|n| n.index == j)
    }
}

/// Atom pairs with distance below `cutoffs[i] + cutoffs[j]`, including
/// periodic images along periodic axes. An atom is never its own neighbor
/// without a lattice shift.
pub fn neighbor_list(structure: &AtomicStructure, cutoffs: &[f64]) -> NeighborList {
    let n = structure.len();
    assert_eq!(cutoffs.len(), n, "one cutoff per atom");
    let mut neighbors = vec![Vec::new(); n];
    if n == 0 {
        return NeighborList { neighbors };
    }
    let max_cut = cutoffs.iter().cloned().fold(0.0, f64::max);
    let reach = 2.0 * max_cut;

    let periodic = structure.cell.map(|c| (c, structure.pbc)).filter(|(_, p)| p.iter().any(|&x| x));

    // wrapped base positions and their integer wrap offsets
    let mut base = structure.positions.clone();
    let mut wrap = vec![[0i32; 3]; n];
    let mut images: Vec<(usize, [i32; 3], Vector3<f64>)> = Vec::new();
    match periodic {
        None => {
            for (i, p) in base.iter().enumerate() {
                images.push((i, [0; 3], *p));
            }
        }
        Some((cell, pbc)) => {
            let inv = cell.try_inverse().expect("validated cell");
            // cell rows are lattice vectors: r = f · cell
            for (i, p) in base.iter_mut().enumerate() {
                let mut f = p.transpose() * inv;
                for k in 0..3 {
                    if pbc[k] {
                        let t = f[k].floor();
                        f[k] -= t;
                        wrap[i][k] = -(t as i32);
                    }
                }
                *p = (f * cell).transpose();
            }
            let spans = image_spans(&cell, pbc, reach);
            let heights = plane_heights(&cell);
            for (i, p) in base.iter().enumerate() {
                let f = p.transpose() * inv;
                for a in -spans[0]..=spans[0] {
                    for b in -spans[1]..=spans[1] {
                        for c in -spans[2]..=spans[2] {
                            let s = [a, b, c];
                            // keep images inside the cutoff shell around the cell
                            let inside = (0..3).all(|k| {
                                if !pbc[k] {
                                    return true;
                                }
                                let fk = f[k] + s[k] as f64;
                                let margin = reach / heights[k];
                                fk >= -margin && fk <= 1.0 + margin
                            });
                            if !inside {
                                continue;
                            }
                            let shift = cell.row(0) * a as f64 + cell.row(1) * b as f64 + cell.row(2) * c as f64;
                            images.push((i, s, p + shift.transpose()));
                        }
                    }
                }
            }
        }
    }

    let width = reach.max(1e-6);
    let bin_of = |p: &Vector3<f64>| {
        [
            (p.x / width).floor() as i64,
            (p.y / width).floor() as i64,
            (p.z / width).floor() as i64,
        ]
    };
    let mut bins: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (k, (_, _, p)) in images.iter().enumerate() {
        bins.entry(bin_of(p)).or_default().push(k);
    }

    for i in 0..n {
        let p = base[i];
        let b = bin_of(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(list) = bins.get(&[b[0] + dx, b[1] + dy, b[2] + dz]) else {
                        continue;
                    };
                    for &k in list {
                        let (j, s, q) = images[k];
                        if j == i && s == [0; 3] {
                            continue;
                        }
                        if (q - p).norm() < cutoffs[i] + cutoffs[j] {
                            // translate back to the unwrapped positions
                            let shift = [
                                s[0] + wrap[j][0] - wrap[i][0],
                                s[1] + wrap[j][1] - wrap[i][1],
                                s[2] + wrap[j][2] - wrap[i][2],
                            ];
                            neighbors[i].push(Neighbor { index: j, shift });
                        }
                    }
                }
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }
    NeighborList { neighbors }
}

/// Distance between opposite faces of the cell for each axis.
fn plane_heights(cell: &Matrix3<f64>) -> [f64; 3] {
    let v = cell.determinant().abs();
    let (a, b, c) = (
        cell.row(0).transpose(),
        cell.row(1).transpose(),
        cell.row(2).transpose(),
    );
    [v / b.cross(&c).norm(), v / c.cross(&a).norm(), v / a.cross(&b).norm()]
}

fn image_spans(cell: &Matrix3<f64>, pbc: [bool; 3], reach: f64) -> [i32; 3] {
    let h = plane_heights(cell);
    let mut out = [0; 3];
    for k in 0..3 {
        if pbc[k] {
            out[k] = (reach / h[k]).ceil() as i32 + 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(d: f64) -> AtomicStructure {
        AtomicStructure::new(
            vec![Element::C, Element::C],
            vec![Vector3::zeros(), Vector3::new(d, 0.0, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn covalent_pair_threshold() {
        let s = pair(1.4);
        let nl = neighbor_list(&s, &natural_cutoffs(&s, &BTreeMap::new()));
        assert!(nl.contains(0, 1) && nl.contains(1, 0));
        let s = pair(2.0);
        let nl = neighbor_list(&s, &natural_cutoffs(&s, &BTreeMap::new()));
        assert!(nl.pairs().is_empty());
    }

    #[test]
    fn wrapped_image_pair() {
        let s = AtomicStructure::new(
            vec![Element::C, Element::C],
            vec![Vector3::new(0.2, 5.0, 5.0), Vector3::new(9.6, 5.0, 5.0)],
        )
        .unwrap()
        .with_cell(Matrix3::from_diagonal_element(10.0), [true; 3])
        .unwrap();
        let nl = neighbor_list(&s, &[0.76, 0.76]);
        assert_eq!(nl.neighbors[0], vec![Neighbor { index: 1, shift: [-1, 0, 0] }]);
        assert_eq!(nl.neighbors[1], vec![Neighbor { index: 0, shift: [1, 0, 0] }]);
        let mut open = s.clone();
        open.pbc = [false; 3];
        assert!(neighbor_list(&open, &[0.76, 0.76]).pairs().is_empty());
    }

    fn brute_force(s: &AtomicStructure, cut: &[f64]) -> Vec<Vec<Neighbor>> {
        let cell = s.cell.unwrap();
        let r = |k: usize| if s.pbc[k] { 3 } else { 0 };
        let mut out = vec![Vec::new(); s.len()];
        for i in 0..s.len() {
            for j in 0..s.len() {
                for a in -r(0)..=r(0) {
                    for b in -r(1)..=r(1) {
                        for c in -r(2)..=r(2) {
                            if i == j && (a, b, c) == (0, 0, 0) {
                                continue;
                            }
                            let t = (cell.row(0) * a as f64 + cell.row(1) * b as f64 + cell.row(2) * c as f64).transpose();
                            if (s.positions[j] + t - s.positions[i]).norm() < cut[i] + cut[j] {
                                out[i].push(Neighbor { index: j, shift: [a, b, c] });
                            }
                        }
                    }
                }
            }
            out[i].sort_unstable();
        }
        out
    }

    #[test]
    fn matches_brute_force_in_skewed_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cell = Matrix3::new(6.0, 0.0, 0.0, 2.5, 5.0, 0.0, -1.5, 1.0, 5.5);
        for pbc in [[true; 3], [true, false, true]] {
            let positions: Vec<_> = (0..40)
                .map(|_| Vector3::new(rng.random_range(-3.0..9.0), rng.random_range(-3.0..9.0), rng.random_range(-3.0..9.0)))
                .collect();
            let s = AtomicStructure::new(vec![Element::C; 40], positions)
                .unwrap()
                .with_cell(cell, pbc)
                .unwrap();
            let cut: Vec<f64> = (0..40).map(|_| rng.random_range(0.5..1.2)).collect();
            assert_eq!(neighbor_list(&s, &cut).neighbors, brute_force(&s, &cut));
        }
    }
}
