//! Limited-memory BFGS relaxation with a backtracking line search.

use std::collections::VecDeque;

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::{max_force, Potential, PotentialError};
use crate::structure::AtomicStructure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxOptions {
    /// Convergence threshold on the largest per-atom force norm (eV/Å).
    pub fmax: f64,
    pub max_steps: usize,
    /// Number of stored correction pairs.
    pub memory: usize,
    /// Largest allowed displacement of any atom in one step (Å).
    pub max_displacement: f64,
    /// Curvature of the initial inverse-Hessian guess (eV/Å²).
    pub initial_curvature: f64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions {
            fmax: 0.01,
            max_steps: 1000,
            memory: 20,
            max_displacement: 0.2,
            initial_curvature: 70.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationResult {
    pub structure: AtomicStructure,
    pub energy: f64,
    pub max_force: f64,
    /// Accepted steps.
    pub iterations: usize,
    pub converged: bool,
    /// Energy after each accepted step, starting with the input energy.
    pub energies: Vec<f64>,
}

fn flat_gradient(forces: &[Vector3<f64>]) -> DVector<f64> {
    DVector::from_iterator(3 * forces.len(), forces.iter().flat_map(|f| f.iter().map(|x| -x)))
}

fn largest_atom_step(d: &DVector<f64>) -> f64 {
    d.as_slice()
        .chunks(3)
        .map(|c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt())
        .fold(0.0, f64::max)
}

/// Relaxes atomic positions at fixed cell until the largest force is at or
/// below `opts.fmax` or `opts.max_steps` steps have been accepted.
pub fn relax(
    structure: &AtomicStructure,
    potential: &dyn Potential,
    opts: &RelaxOptions,
) -> Result<RelaxationResult, PotentialError> {
    if !(opts.fmax > 0.0) {
        return Err(PotentialError::InvalidParameter("fmax must be positive".into()));
    }
    let mut current = structure.clone();
    let (mut energy, mut forces) = potential.energy_and_forces(&current)?;
    if !energy.is_finite() {
        return Err(PotentialError::InvalidParameter("initial energy is not finite".into()));
    }
    let mut energies = vec![energy];
    let mut history: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;

    let result = |s: AtomicStructure, e: f64, f: &[Vector3<f64>], it: usize, es: Vec<f64>| {
        let mf = max_force(f);
        RelaxationResult {
            structure: s,
            energy: e,
            max_force: mf,
            iterations: it,
            converged: mf <= opts.fmax,
            energies: es,
        }
    };

    if potential.is_static() {
        return Ok(result(current, energy, &forces, 0, energies));
    }

    while iterations < opts.max_steps && max_force(&forces) > opts.fmax {
        let x = current.flat_positions();
        let g = flat_gradient(&forces);

        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * s.dot(&q);
            q.axpy(-a, y, 1.0);
            alphas.push(a);
        }
        let gamma = match history.back() {
            Some((s, y, _)) => s.dot(y) / y.dot(y),
            None => 1.0 / opts.initial_curvature,
        };
        let mut d = q * gamma;
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * y.dot(&d);
            d.axpy(a - b, s, 1.0);
        }
        d.neg_mut();
        if d.dot(&g) >= 0.0 {
            history.clear();
            d = -&g / opts.initial_curvature;
        }
        let longest = largest_atom_step(&d);
        if longest > opts.max_displacement {
            d *= opts.max_displacement / longest;
        }

        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..40 {
            let mut trial = current.clone();
            trial.set_flat_positions(&(&x + &d * alpha));
            let (e_new, f_new) = potential.energy_and_forces(&trial)?;
            if !e_new.is_finite() || f_new.iter().any(|f| !f.iter().all(|v| v.is_finite())) {
                return Err(PotentialError::Diverged {
                    last: Box::new(result(current, energy, &forces, iterations, energies)),
                });
            }
            if e_new <= energy {
                accepted = Some((trial, e_new, f_new));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, e_new, f_new)) = accepted else {
            if history.is_empty() {
                // no descent possible along the gradient at machine precision
                log::warn!("line search failed at max force {:.3e}", max_force(&forces));
                break;
            }
            history.clear();
            continue;
        };
        let s = trial.flat_positions() - &x;
        let y = flat_gradient(&f_new) - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        current = trial;
        energy = e_new;
        forces = f_new;
        iterations += 1;
        energies.push(energy);
    }
    Ok(result(current, energy, &forces, iterations, energies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::Element;
    use crate::potential::harmonic::{HarmonicToy, Spring};
    use crate::potential::lj::{LennardJones, LjParams, LjTable};

    fn dimer(r: f64) -> AtomicStructure {
        AtomicStructure::new(
            vec![Element::N, Element::N],
            vec![Vector3::zeros(), Vector3::new(r, 0.1, -0.2)],
        )
        .unwrap()
    }

    fn spring() -> HarmonicToy {
        HarmonicToy::new(
            vec![Spring { i: 0, j: 1, k: 20.0, r0: 1.1 }],
            vec![0, 0],
            LjTable::uniform(LjParams::new(0.01, 3.0).unwrap(), [Element::N]),
            false,
        )
        .unwrap()
    }

    #[test]
    fn stretched_dimer_relaxes_to_bond_length() {
        let opts = RelaxOptions { fmax: 1e-6, ..Default::default() };
        let r = relax(&dimer(1.6), &spring(), &opts).unwrap();
        assert!(r.converged);
        let d = (r.structure.positions[1] - r.structure.positions[0]).norm();
        assert!((d - 1.1).abs() < 1e-4, "{d}");
        assert!(r.energies.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn minimum_needs_no_steps() {
        let s = AtomicStructure::new(
            vec![Element::N, Element::N],
            vec![Vector3::zeros(), Vector3::new(1.1, 0.0, 0.0)],
        )
        .unwrap();
        let r = relax(&s, &spring(), &RelaxOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 1);
    }

    #[test]
    fn step_budget_exhausted() {
        let opts = RelaxOptions { max_steps: 1, ..Default::default() };
        let r = relax(&dimer(3.0), &spring(), &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn lj_cluster_energy_monotone() {
        let lj = LennardJones::new(LjTable::uniform(LjParams::new(0.01, 3.0).unwrap(), [Element::N]));
        let pos = vec![
            Vector3::zeros(),
            Vector3::new(3.6, 0.2, 0.0),
            Vector3::new(1.5, 3.0, 0.3),
            Vector3::new(1.4, 1.2, 3.1),
            Vector3::new(4.0, 3.5, 2.0),
        ];
        let s = AtomicStructure::new(vec![Element::N; 5], pos).unwrap();
        let r = relax(&s, &lj, &RelaxOptions::default()).unwrap();
        assert!(r.converged, "max force {}", r.max_force);
        assert!(r.energies.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.energy < r.energies[0]);
    }

    struct Exploding;
    impl Potential for Exploding {
        fn energy_and_forces(&self, s: &AtomicStructure) -> Result<(f64, Vec<Vector3<f64>>), PotentialError> {
            let x = s.positions[0].x;
            let e = if x > 1e-3 { f64::NAN } else { -x };
            Ok((e, vec![Vector3::new(1.0, 0.0, 0.0)]))
        }
    }

    #[test]
    fn divergence_reports_last_state() {
        let s = AtomicStructure::new(vec![Element::H], vec![Vector3::zeros()]).unwrap();
        match relax(&s, &Exploding, &RelaxOptions::default()) {
            Err(PotentialError::Diverged { last }) => assert_eq!(last.structure.positions[0], Vector3::zeros()),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
