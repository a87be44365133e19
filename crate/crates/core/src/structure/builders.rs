//! Idealized test and demo geometries: planar benzenoid hydrocarbons, an
//! anthracene-like molecular crystal and a diatomic lattice host.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};

use super::AtomicStructure;
use crate::elements::Element;

pub const CC_BOND: f64 = 1.40;
pub const CH_BOND: f64 = 1.08;

/// Planar benzenoid hydrocarbon in the xy plane built from hexagon centers
/// given in axial lattice coordinates `(q, r)`; `(1, 0)` is the neighbor
/// along +x. Hydrogens cap every carbon with two carbon neighbors. The
/// result is centered at its center of mass.
pub fn benzenoid(centers: &[(i32, i32)]) -> AtomicStructure {
    let d = 3f64.sqrt() * CC_BOND;
    let mut carbons: Vec<Vector3<f64>> = Vec::new();
    for &(q, r) in centers {
        let c = Vector3::new(d * (q as f64 + r as f64 / 2.0), 1.5 * CC_BOND * r as f64, 0.0);
        for k in 0..6 {
            let a = (30.0 + 60.0 * k as f64).to_radians();
            let p = c + Vector3::new(a.cos(), a.sin(), 0.0) * CC_BOND;
            if !carbons.iter().any(|q| (q - p).norm() < 1e-6) {
                carbons.push(p);
            }
        }
    }
    let mut hydrogens = Vec::new();
    for p in &carbons {
        let nbrs: Vec<&Vector3<f64>> = carbons
            .iter()
            .filter(|q| {
                let r = (*q - p).norm();
                r > 1e-6 && r < CC_BOND * 1.1
            })
            .collect();
        if nbrs.len() == 2 {
            let mid = (nbrs[0] + nbrs[1]) / 2.0;
            hydrogens.push(p + (p - mid).normalize() * CH_BOND);
        }
    }
    let mut elements = vec![Element::C; carbons.len()];
    elements.extend(vec![Element::H; hydrogens.len()]);
    carbons.extend(hydrogens);
    let mut s = AtomicStructure::new(elements, carbons).expect("finite geometry");
    let com = s.center_of_mass();
    s.translate(&-com);
    s
}

pub fn benzene() -> AtomicStructure {
    benzenoid(&[(0, 0)])
}

/// Anthracene, long axis along x (14 C + 10 H).
pub fn anthracene() -> AtomicStructure {
    benzenoid(&[(-1, 0), (0, 0), (1, 0)])
}

/// Hexagon centers of terrylene.
pub const TERRYLENE_RINGS: [(i32, i32); 8] =
    [(0, 1), (-1, 1), (0, 0), (0, -1), (1, -1), (1, -2), (1, -3), (2, -3)];

/// Hexagon centers of dibenzoterrylene (terrylene plus two benzo rings on
/// the central naphthalene unit).
pub const DIBENZOTERRYLENE_RINGS: [(i32, i32); 10] = [
    (0, 1),
    (-1, 1),
    (0, 0),
    (0, -1),
    (1, -1),
    (1, -2),
    (1, -3),
    (2, -3),
    (-1, -1),
    (2, -1),
];

/// Monoclinic anthracene-like cell (P2₁/a-style herringbone, 2 molecules,
/// 48 atoms). Lattice a = 8.562, b = 6.038, c = 11.184 Å, β = 124.7°.
pub fn anthracene_unit_cell() -> AtomicStructure {
    let (a, b, c, beta) = (8.562, 6.038, 11.184, 124.7f64.to_radians());
    let cell = Matrix3::new(
        a,
        0.0,
        0.0,
        0.0,
        b,
        0.0,
        c * beta.cos(),
        0.0,
        c * beta.sin(),
    );
    let mol = anthracene();
    // long axis tilted 10° from c towards a; planes at ±50° herringbone
    let c_dir = cell.row(2).transpose().normalize();
    let tilt = 10f64.to_radians();
    let long = (c_dir * tilt.cos() + Vector3::x() * tilt.sin()).normalize();
    let mut short0 = Vector3::y();
    short0 -= long * long.dot(&short0);
    short0.normalize_mut();
    let normal0 = long.cross(&short0);

    let mut out: Option<AtomicStructure> = None;
    for (sign, origin) in [
        (1.0, Vector3::zeros()),
        (-1.0, (cell.row(0) + cell.row(1)).transpose() / 2.0),
    ] {
        let t = sign * 50f64.to_radians();
        let short = short0 * t.cos() + normal0 * t.sin();
        let normal = long.cross(&short);
        let frame = Matrix3::from_columns(&[long, short, normal]);
        let mut m = mol.clone();
        for p in &mut m.positions {
            *p = frame * *p + origin;
        }
        match &mut out {
            None => out = Some(m),
            Some(s) => s.extend(&m),
        }
    }
    out.expect("two molecules")
        .with_cell(cell, [true; 3])
        .expect("valid cell")
}

/// Simple-cubic lattice of N₂-like dimers, one per cell, oriented along a
/// fixed skew axis. `repeats = [5, 5, 4]` gives 200 atoms.
pub fn dimer_lattice(repeats: [usize; 3], spacing: f64, bond: f64) -> AtomicStructure {
    let axis = Unit::new_normalize(Vector3::new(1.0, 1.0, 1.0));
    let dir = Rotation3::from_axis_angle(&axis, 0.3) * Vector3::x();
    let mut elements = Vec::new();
    let mut positions = Vec::new();
    for i in 0..repeats[0] {
        for j in 0..repeats[1] {
            for k in 0..repeats[2] {
                let c = Vector3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * spacing;
                elements.extend([Element::N, Element::N]);
                positions.push(c - dir * bond / 2.0);
                positions.push(c + dir * bond / 2.0);
            }
        }
    }
    let cell = Matrix3::from_diagonal(&Vector3::new(
        repeats[0] as f64 * spacing,
        repeats[1] as f64 * spacing,
        repeats[2] as f64 * spacing,
    ));
    AtomicStructure::new(elements, positions)
        .expect("finite geometry")
        .with_cell(cell, [true; 3])
        .expect("valid cell")
}
