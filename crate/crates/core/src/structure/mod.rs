//! Atomic structures with optional periodic cells.

pub mod builders;
pub mod molecules;
pub mod neighbors;
pub mod xyz;

use std::collections::BTreeMap;

use nalgebra::{DVector, Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elements::Element;

pub use molecules::{identify_molecules, identify_molecules_with, MoleculeLabels, BOND_SKIN};
pub use neighbors::{natural_cutoffs, neighbor_list, Neighbor, NeighborList};
pub use xyz::{parse_xyz, read_xyz, write_xyz, xyz_string};

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("{what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("atom {0} has a non-finite position")]
    NonFinitePosition(usize),
    #[error("atom {0} has a non-positive mass")]
    NonPositiveMass(usize),
    #[error("cell has zero volume")]
    DegenerateCell,
    #[error("operation requires a periodic cell")]
    MissingCell,
    #[error("supercell repeats must be >= 1, got {0:?}")]
    InvalidRepeats([usize; 3]),
    #[error("xyz line {line}: {message}")]
    Xyz { line: usize, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Atoms with Cartesian positions (Å), masses (amu) and an optional cell
/// whose rows are the lattice vectors (Å).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicStructure {
    pub elements: Vec<Element>,
    pub positions: Vec<Vector3<f64>>,
    pub masses: Vec<f64>,
    pub cell: Option<Matrix3<f64>>,
    pub pbc: [bool; 3],
}

impl AtomicStructure {
    /// Non-periodic structure with standard masses.
    pub fn new(
        elements: Vec<Element>,
        positions: Vec<Vector3<f64>>,
    ) -> Result<Self, StructureError> {
        let masses = elements.iter().map(|e| e.mass()).collect();
        Self::with_masses(elements, positions, masses)
    }

    pub fn with_masses(
        elements: Vec<Element>,
        positions: Vec<Vector3<f64>>,
        masses: Vec<f64>,
    ) -> Result<Self, StructureError> {
        let s = AtomicStructure {
            elements,
            positions,
            masses,
            cell: None,
            pbc: [false; 3],
        };
        s.validate()?;
        Ok(s)
    }

    /// Attaches a cell. A left-handed cell is made right-handed by
    /// negating its third vector, which spans the same lattice.
    pub fn with_cell(mut self, cell: Matrix3<f64>, pbc: [bool; 3]) -> Result<Self, StructureError> {
        let det = cell.determinant();
        if !det.is_finite() || det.abs() < 1e-12 {
            return Err(StructureError::DegenerateCell);
        }
        let mut cell = cell;
        if det < 0.0 {
            let c = -cell.row(2);
            cell.set_row(2, &c);
        }
        self.cell = Some(cell);
        self.pbc = pbc;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        let n = self.elements.len();
        for (what, got) in [("positions", self.positions.len()), ("masses", self.masses.len())] {
            if got != n {
                return Err(StructureError::LengthMismatch {
                    what,
                    expected: n,
                    got,
                });
            }
        }
        if let Some(i) = self.positions.iter().position(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(StructureError::NonFinitePosition(i));
        }
        if let Some(i) = self.masses.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(StructureError::NonPositiveMass(i));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn center_of_mass(&self) -> Vector3<f64> {
        let m = self.total_mass();
        if m == 0.0 {
            return Vector3::zeros();
        }
        self.positions
            .iter()
            .zip(&self.masses)
            .fold(Vector3::zeros(), |acc, (p, &w)| acc + p * w)
            / m
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vector3<f64>, Vector3<f64>) {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for p in &self.positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    pub fn translate(&mut self, shift: &Vector3<f64>) {
        for p in &mut self.positions {
            *p += shift;
        }
    }

    /// Rotates all atoms by `angle` (radians) about `axis` through `center`.
    pub fn rotate_about(&mut self, center: &Vector3<f64>, axis: &Vector3<f64>, angle: f64) {
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle);
        for p in &mut self.positions {
            *p = center + rot * (*p - center);
        }
    }

    /// Lengths of the cell vectors.
    pub fn cell_lengths(&self) -> Option<Vector3<f64>> {
        self.cell
            .map(|c| Vector3::new(c.row(0).norm(), c.row(1).norm(), c.row(2).norm()))
    }

    pub fn volume(&self) -> Option<f64> {
        self.cell.map(|c| c.determinant())
    }

    /// Atoms at `indices`, in that order, keeping the cell.
    pub fn subset(&self, indices: &[usize]) -> AtomicStructure {
        AtomicStructure {
            elements: indices.iter().map(|&i| self.elements[i]).collect(),
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            masses: indices.iter().map(|&i| self.masses[i]).collect(),
            cell: self.cell,
            pbc: self.pbc,
        }
    }

    /// Appends the atoms of `other`; the cell of `self` is kept.
    pub fn extend(&mut self, other: &AtomicStructure) {
        self.elements.extend_from_slice(&other.elements);
        self.positions.extend_from_slice(&other.positions);
        self.masses.extend_from_slice(&other.masses);
    }

    /// Positions flattened as x0 y0 z0 x1 ...
    pub fn flat_positions(&self) -> DVector<f64> {
        DVector::from_iterator(3 * self.len(), self.positions.iter().flat_map(|p| p.iter().copied()))
    }

    pub fn set_flat_positions(&mut self, flat: &DVector<f64>) {
        assert_eq!(flat.len(), 3 * self.len());
        for (i, p) in self.positions.iter_mut().enumerate() {
            *p = Vector3::new(flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]);
        }
    }

    pub fn element_counts(&self) -> BTreeMap<Element, usize> {
        let mut counts = BTreeMap::new();
        for &e in &self.elements {
            *counts.entry(e).or_insert(0) += 1;
        }
        counts
    }

    /// Hill-style formula, carbon and hydrogen first.
    pub fn formula(&self) -> String {
        let counts = self.element_counts();
        let mut parts: Vec<(String, usize)> =
            counts.iter().map(|(e, &n)| (e.symbol().to_string(), n)).collect();
        let has_c = counts.contains_key(&Element::C);
        parts.sort_by_key(|(s, _)| match (has_c, s.as_str()) {
            (true, "C") => (0, String::new()),
            (true, "H") => (1, String::new()),
            _ => (2, s.clone()),
        });
        parts
            .into_iter()
            .map(|(s, n)| if n == 1 { s } else { format!("{s}{n}") })
            .collect()
    }
}

/// Repeats `unit` `na × nb × nc` times. Atoms are ordered image by image,
/// with the original atom order inside each image.
pub fn make_supercell(
    unit: &AtomicStructure,
    repeats: [usize; 3],
) -> Result<AtomicStructure, StructureError> {
    let cell = unit.cell.ok_or(StructureError::MissingCell)?;
    if repeats.contains(&0) {
        return Err(StructureError::InvalidRepeats(repeats));
    }
    let [na, nb, nc] = repeats;
    let count = na * nb * nc;
    let mut out = AtomicStructure {
        elements: Vec::with_capacity(unit.len() * count),
        positions: Vec::with_capacity(unit.len() * count),
        masses: Vec::with_capacity(unit.len() * count),
        cell: None,
        pbc: unit.pbc,
    };
    for i in 0..na {
        for j in 0..nb {
            for k in 0..nc {
                let shift: Vector3<f64> = (cell.row(0) * i as f64
                    + cell.row(1) * j as f64
                    + cell.row(2) * k as f64)
                    .transpose();
                out.elements.extend_from_slice(&unit.elements);
                out.masses.extend_from_slice(&unit.masses);
                out.positions.extend(unit.positions.iter().map(|p| p + shift));
            }
        }
    }
    let mut sc = cell;
    for (r, &n) in repeats.iter().enumerate() {
        let row = cell.row(r) * n as f64;
        sc.set_row(r, &row);
    }
    out.cell = Some(sc);
    Ok(out)
}
