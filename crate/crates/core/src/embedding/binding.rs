use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingTrial};
use crate::potential::{relax, Potential, PotentialError, RelaxOptions, RelaxationResult};
use crate::structure::AtomicStructure;

/// E_complex − E_emitter − ((N_complex − N_emitter) / N_supercell)·E_supercell,
/// the host reference being the pristine supercell energy per atom scaled
/// to the number of host atoms left in the complex.
pub fn binding_energy(
    e_complex: f64,
    e_emitter: f64,
    n_complex: usize,
    n_emitter: usize,
    n_supercell: usize,
    e_supercell: f64,
) -> f64 {
    assert!(n_supercell > 0, "supercell must contain atoms");
    let host_atoms = n_complex as f64 - n_emitter as f64;
    e_complex - e_emitter - host_atoms / n_supercell as f64 * e_supercell
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEnergy {
    pub trial: usize,
    pub relaxed_energy: Option<f64>,
    pub binding_energy: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Position of the winner in the input slice.
    pub index: usize,
    pub binding_energy: f64,
    pub relaxed: RelaxationResult,
    pub emitter_energy: f64,
    pub supercell_energy: f64,
    pub energies: Vec<TrialEnergy>,
}

/// Relaxes the emitter, the pristine supercell and every trial complex, and
/// returns the trial with the lowest binding energy. Ties go to the lowest
/// trial number, so the choice does not depend on input order.
///
/// `potential_for` builds the potential for a given structure, which lets
/// topology-dependent potentials bind to each geometry. Trials whose
/// relaxation fails are reported with no energy and skipped.
pub fn select_most_stable<F>(
    trials: &[EmbeddingTrial],
    emitter: &AtomicStructure,
    supercell: &AtomicStructure,
    potential_for: F,
    opts: &RelaxOptions,
) -> Result<Selection, EmbeddingError>
where
    F: Fn(&AtomicStructure) -> Result<Box<dyn Potential>, PotentialError> + Sync,
{
    if trials.is_empty() {
        return Err(EmbeddingError::NoTrials);
    }
    let run = |s: &AtomicStructure| -> Result<RelaxationResult, PotentialError> {
        let p = potential_for(s)?;
        relax(s, p.as_ref(), opts)
    };
    let (e_emit, e_cell) = rayon::join(|| run(emitter), || run(supercell));
    let (e_emit, e_cell) = (e_emit?.energy, e_cell?.energy);

    let relaxed: Vec<Result<RelaxationResult, PotentialError>> =
        trials.par_iter().map(|t| run(&t.structure)).collect();

    let mut best: Option<(usize, f64)> = None;
    let better = |eb: f64, i: usize, (j, b): (usize, f64)| eb < b || (eb == b && trials[i].trial < trials[j].trial);
    let mut energies = Vec::with_capacity(trials.len());
    for (i, (t, r)) in trials.iter().zip(&relaxed).enumerate() {
        match r {
            Ok(r) => {
                let eb = binding_energy(r.energy, e_emit, r.structure.len(), emitter.len(), supercell.len(), e_cell);
                if best.is_none_or(|cur| better(eb, i, cur)) {
                    best = Some((i, eb));
                }
                energies.push(TrialEnergy {
                    trial: t.trial,
                    relaxed_energy: Some(r.energy),
                    binding_energy: Some(eb),
                    converged: r.converged,
                });
            }
            Err(e) => {
                log::warn!("trial {} relaxation failed: {e}", t.trial);
                energies.push(TrialEnergy {
                    trial: t.trial,
                    relaxed_energy: None,
                    binding_energy: None,
                    converged: false,
                });
            }
        }
    }
    let (index, eb) = best.ok_or(EmbeddingError::AllRelaxationsFailed)?;
    let relaxed = relaxed.into_iter().nth(index).expect("index in range").expect("successful relaxation");
    Ok(Selection {
        index,
        binding_energy: eb,
        relaxed,
        emitter_energy: e_emit,
        supercell_energy: e_cell,
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::Element;
    use crate::potential::ExternalData;
    use nalgebra::Vector3;

    #[test]
    fn hand_arithmetic_and_null_case() {
        assert_eq!(binding_energy(-10.0, -2.0, 120, 20, 200, -16.0), 0.0);
        let (ee, es) = (-3.25, -40.0);
        let e_complex = ee + 150.0 / 200.0 * es;
        assert_eq!(binding_energy(e_complex, ee, 170, 20, 200, es), 0.0);
        let a = binding_energy(-10.0, -2.0, 120, 20, 200, -16.0);
        let b = binding_energy(-10.5, -2.0, 120, 20, 200, -16.0);
        assert_eq!(a - b, 0.5);
    }

    fn trial(k: usize, n: usize) -> EmbeddingTrial {
        let s = AtomicStructure::new(vec![Element::H; n], (0..n).map(|i| Vector3::new(i as f64, k as f64, 0.0)).collect()).unwrap();
        EmbeddingTrial {
            trial: k,
            structure: s,
            host_indices: (0..n - 1).collect(),
            removed_molecules: vec![],
            rotation_axis: [0.0, 0.0, 1.0],
            rotation_angle_deg: 0.0,
            translation: [0.0; 3],
            emitter_center: [0.0; 3],
            accepted: true,
        }
    }

    fn tabulated(energy_by_row: Vec<f64>) -> impl Fn(&AtomicStructure) -> Result<Box<dyn Potential>, PotentialError> + Sync {
        // energy chosen by the y coordinate of the first atom (the trial tag)
        move |s: &AtomicStructure| {
            let e = if s.len() == 3 { energy_by_row[s.positions[0].y as usize] } else { 0.0 };
            Ok(Box::new(ExternalData {
                n_atoms: s.len(),
                energy_ev: e,
                forces: vec![[0.0; 3]; s.len()],
                hessian: None,
            }) as Box<dyn Potential>)
        }
    }

    #[test]
    fn argmin_and_permutation_invariance() {
        let emitter = AtomicStructure::new(vec![Element::H], vec![Vector3::zeros()]).unwrap();
        let cell = AtomicStructure::new(vec![Element::H; 2], vec![Vector3::zeros(), Vector3::x()]).unwrap();
        let trials = vec![trial(0, 3), trial(1, 3), trial(2, 3)];
        let pot = tabulated(vec![-0.5, -0.6, -0.6]);
        let opts = RelaxOptions::default();
        let sel = select_most_stable(&trials, &emitter, &cell, &pot, &opts).unwrap();
        assert_eq!(sel.index, 1);
        assert!((sel.binding_energy + 0.6).abs() < 1e-15);

        let reversed = vec![trials[2].clone(), trials[1].clone(), trials[0].clone()];
        let sel_r = select_most_stable(&reversed, &emitter, &cell, &pot, &opts).unwrap();
        assert_eq!(reversed[sel_r.index].trial, 1);
        assert_eq!(sel_r.binding_energy, sel.binding_energy);

        let single = select_most_stable(&trials[..1], &emitter, &cell, &pot, &opts).unwrap();
        assert_eq!(single.index, 0);
        assert!(matches!(select_most_stable(&[], &emitter, &cell, &pot, &opts), Err(EmbeddingError::NoTrials)));
    }
}
