use std::collections::BTreeMap;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Potential, PotentialError};
use crate::elements::Element;
use crate::structure::AtomicStructure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjParams {
    /// Well depth (eV).
    pub epsilon: f64,
    /// Zero-crossing distance (Å).
    pub sigma: f64,
}

impl LjParams {
    pub fn new(epsilon: f64, sigma: f64) -> Result<Self, PotentialError> {
        if !(epsilon > 0.0 && sigma > 0.0 && epsilon.is_finite() && sigma.is_finite()) {
            return Err(PotentialError::InvalidParameter(format!(
                "LJ epsilon and sigma must be positive, got {epsilon}, {sigma}"
            )));
        }
        Ok(LjParams { epsilon, sigma })
    }

    /// Pair energy and dE/dr at distance `r`.
    pub fn full(&self, r: f64) -> (f64, f64) {
        let sr6 = (self.sigma / r).powi(6);
        let sr12 = sr6 * sr6;
        let e = 4.0 * self.epsilon * (sr12 - sr6);
        let de = 4.0 * self.epsilon * (-12.0 * sr12 + 6.0 * sr6) / r;
        (e, de)
    }

    /// The r⁻¹² part only: ε(σ/r)¹².
    pub fn repulsive(&self, r: f64) -> (f64, f64) {
        let sr12 = (self.sigma / r).powi(12);
        let e = self.epsilon * sr12;
        (e, -12.0 * e / r)
    }
}

/// Pair parameters for element pairs: explicit overrides first, otherwise
/// Lorentz-Berthelot mixing of per-element values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LjTable {
    elements: BTreeMap<Element, LjParams>,
    pairs: BTreeMap<(Element, Element), LjParams>,
}

fn ordered(a: Element, b: Element) -> (Element, Element) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl LjTable {
    /// `pairs` keys are "A-B" element symbol pairs.
    pub fn new(
        elements: BTreeMap<Element, LjParams>,
        pairs: &BTreeMap<String, LjParams>,
    ) -> Result<Self, PotentialError> {
        for p in elements.values() {
            LjParams::new(p.epsilon, p.sigma)?;
        }
        let mut table = BTreeMap::new();
        for (key, p) in pairs {
            LjParams::new(p.epsilon, p.sigma)?;
            let (a, b) = key
                .split_once('-')
                .and_then(|(a, b)| Some((Element::from_symbol(a.trim())?, Element::from_symbol(b.trim())?)))
                .ok_or_else(|| PotentialError::InvalidParameter(format!("bad pair key `{key}`")))?;
            table.insert(ordered(a, b), *p);
        }
        Ok(LjTable {
            elements,
            pairs: table,
        })
    }

    pub fn uniform(params: LjParams, elements: impl IntoIterator<Item = Element>) -> Self {
        LjTable {
            elements: elements.into_iter().map(|e| (e, params)).collect(),
            pairs: BTreeMap::new(),
        }
    }

    pub fn get(&self, a: Element, b: Element) -> Result<LjParams, PotentialError> {
        if let Some(p) = self.pairs.get(&ordered(a, b)) {
            return Ok(*p);
        }
        match (self.elements.get(&a), self.elements.get(&b)) {
            (Some(pa), Some(pb)) => Ok(LjParams {
                epsilon: (pa.epsilon * pb.epsilon).sqrt(),
                sigma: 0.5 * (pa.sigma + pb.sigma),
            }),
            _ => Err(PotentialError::MissingParameter(a, b)),
        }
    }

    /// Parameter matrix for the species present, indexed by atom pair.
    pub(crate) fn resolve(&self, elements: &[Element]) -> Result<PairMatrix, PotentialError> {
        let mut species: Vec<Element> = elements.to_vec();
        species.sort();
        species.dedup();
        let k = species.len();
        let mut params = Vec::with_capacity(k * k);
        for &a in &species {
            for &b in &species {
                params.push(self.get(a, b)?);
            }
        }
        let kind = elements
            .iter()
            .map(|e| species.binary_search(e).expect("present"))
            .collect();
        Ok(PairMatrix { kind, k, params })
    }
}

pub(crate) struct PairMatrix {
    kind: Vec<usize>,
    k: usize,
    params: Vec<LjParams>,
}

impl PairMatrix {
    pub(crate) fn get(&self, i: usize, j: usize) -> LjParams {
        self.params[self.kind[i] * self.k + self.kind[j]]
    }
}

/// Lennard-Jones over all atom pairs, no cutoff.
#[derive(Debug, Clone)]
pub struct LennardJones {
    pub table: LjTable,
}

impl LennardJones {
    pub fn new(table: LjTable) -> Self {
        LennardJones { table }
    }
}

impl Potential for LennardJones {
    fn energy_and_forces(
        &self,
        s: &AtomicStructure,
    ) -> Result<(f64, Vec<Vector3<f64>>), PotentialError> {
        let pm = self.table.resolve(&s.elements)?;
        let n = s.len();
        // each atom accumulates its own row, so no reduction across threads
        let rows: Vec<(f64, Vector3<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut e = 0.0;
                let mut f = Vector3::zeros();
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let d = s.positions[i] - s.positions[j];
                    let r = d.norm();
                    let (eij, de) = pm.get(i, j).full(r);
                    e += 0.5 * eij;
                    f -= d * (de / r);
                }
                (e, f)
            })
            .collect();
        let energy = rows.iter().map(|r| r.0).sum();
        Ok((energy, rows.into_iter().map(|r| r.1).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::test_support::force_fd_error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table() -> LjTable {
        LjTable::uniform(LjParams::new(0.01, 3.0).unwrap(), [Element::C, Element::H, Element::N])
    }

    #[test]
    fn force_vanishes_at_minimum() {
        let r = 2f64.powf(1.0 / 6.0) * 3.0;
        let s = AtomicStructure::new(
            vec![Element::C, Element::C],
            vec![Vector3::zeros(), Vector3::new(r, 0.0, 0.0)],
        )
        .unwrap();
        let (e, f) = LennardJones::new(table()).energy_and_forces(&s).unwrap();
        assert!((e + 0.01).abs() < 1e-14);
        assert!(f.iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn forces_match_finite_differences_and_sum_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pairs = BTreeMap::new();
        pairs.insert("C-H".to_string(), LjParams::new(0.02, 2.5).unwrap());
        let mut elements = BTreeMap::new();
        elements.insert(Element::C, LjParams::new(0.01, 3.2).unwrap());
        elements.insert(Element::H, LjParams::new(0.005, 2.6).unwrap());
        let lj = LennardJones::new(LjTable::new(elements, &pairs).unwrap());
        for _ in 0..5 {
            let pos: Vec<_> = (0..10)
                .map(|_| Vector3::new(rng.random_range(0.0..8.0), rng.random_range(0.0..8.0), rng.random_range(0.0..8.0)))
                .collect();
            let el: Vec<_> = (0..10).map(|i| if i % 3 == 0 { Element::H } else { Element::C }).collect();
            let s = AtomicStructure::new(el, pos).unwrap();
            // skip pathological overlaps
            let close = (0..10).any(|i| (0..i).any(|j| (s.positions[i] - s.positions[j]).norm() < 2.0));
            if close {
                continue;
            }
            assert!(force_fd_error(&lj, &s, 1e-5) < 1e-6);
            let total: Vector3<f64> = lj.forces(&s).unwrap().iter().sum();
            assert!(total.norm() < 1e-12);
        }
    }

    #[test]
    fn missing_and_invalid_parameters() {
        let lj = LennardJones::new(table());
        let s = AtomicStructure::new(vec![Element::O], vec![Vector3::zeros()]).unwrap();
        assert!(matches!(lj.energy(&s), Err(PotentialError::MissingParameter(..))));
        assert!(LjParams::new(-1.0, 1.0).is_err());
        let mut bad = BTreeMap::new();
        bad.insert("C+H".to_string(), LjParams::new(1.0, 1.0).unwrap());
        assert!(LjTable::new(BTreeMap::new(), &bad).is_err());
    }
}
