//! Random insertion of an emitter molecule into a host supercell, and
//! selection of the most stable insertion by binding energy.

mod binding;

use std::collections::BTreeSet;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::{identify_molecules, AtomicStructure, MoleculeLabels};

pub use binding::{binding_energy, select_most_stable, Selection, TrialEnergy};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("invalid embedding configuration: {0}")]
    InvalidConfig(String),
    #[error("host structure has no cell")]
    HostWithoutCell,
    #[error("emitter extent {emitter:?} does not fit inside host extent {host:?}")]
    EmitterTooLarge { emitter: [f64; 3], host: [f64; 3] },
    #[error("no trials to select from")]
    NoTrials,
    #[error("relaxation failed for every candidate")]
    AllRelaxationsFailed,
    #[error(transparent)]
    Potential(#[from] crate::potential::PotentialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    /// Host atoms closer than this to any emitter atom mark their molecule
    /// for deletion (Å).
    pub cutoff: f64,
    /// Translation per trial is uniform in ±scale·(cell length) per axis.
    pub translation_scale: f64,
    pub min_removed: usize,
    pub max_removed: usize,
    /// Accepted structures kept per removal count.
    pub per_count: usize,
    pub max_trials: usize,
    pub seed: u64,
    /// Restart each trial from the centered emitter instead of continuing
    /// the random walk of the previous trial.
    pub fresh_each_trial: bool,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            cutoff: 1.0,
            translation_scale: 0.05,
            min_removed: 2,
            max_removed: 5,
            per_count: 25,
            max_trials: 10_000,
            seed: 0,
            fresh_each_trial: false,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |m: &str| Err(EmbeddingError::InvalidConfig(m.to_string()));
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return bad("cutoff must be positive");
        }
        if !(self.translation_scale >= 0.0 && self.translation_scale.is_finite()) {
            return bad("translation scale must be non-negative");
        }
        if self.min_removed > self.max_removed {
            return bad("min_removed exceeds max_removed");
        }
        if self.per_count == 0 || self.max_trials == 0 {
            return bad("per_count and max_trials must be at least 1");
        }
        Ok(())
    }
}

/// One accepted insertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTrial {
    /// Zero-based trial number that produced this structure.
    pub trial: usize,
    /// Remaining host atoms followed by the emitter atoms.
    pub structure: AtomicStructure,
    /// Original host indices of the remaining host atoms, ascending.
    pub host_indices: Vec<usize>,
    /// Host molecule ids deleted in this trial, ascending.
    pub removed_molecules: Vec<usize>,
    /// Rotation applied in this trial (unit axis, degrees).
    pub rotation_axis: [f64; 3],
    pub rotation_angle_deg: f64,
    /// Translation applied in this trial (Å).
    pub translation: [f64; 3],
    /// Emitter center of mass after this trial (Å).
    pub emitter_center: [f64; 3],
    pub accepted: bool,
}

impl EmbeddingTrial {
    pub fn removed_count(&self) -> usize {
        self.removed_molecules.len()
    }

    pub fn emitter_range(&self) -> std::ops::Range<usize> {
        self.host_indices.len()..self.structure.len()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: usize,
    pub accepted: usize,
    pub rejected_containment: usize,
    pub rejected_removal_count: usize,
    pub rejected_quota_full: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingOutcome {
    pub accepted: Vec<EmbeddingTrial>,
    pub stats: TrialStats,
    pub host_molecules: MoleculeLabels,
}

impl EmbeddingOutcome {
    /// Accepted count per number of removed molecules, from `min` to `max`.
    pub fn removal_histogram(&self, cfg: &EmbeddingConfig) -> Vec<(usize, usize)> {
        (cfg.min_removed..=cfg.max_removed)
            .map(|k| (k, self.accepted.iter().filter(|t| t.removed_count() == k).count()))
            .collect()
    }
}

fn random_axis(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

struct Move {
    axis: Vector3<f64>,
    angle_deg: f64,
    shift: Vector3<f64>,
}

fn draw_move(rng: &mut impl Rng, lengths: &Vector3<f64>, scale: f64) -> Move {
    let axis = random_axis(rng);
    let angle_deg = rng.random_range(0.0..360.0);
    let shift = Vector3::from_fn(|k, _| scale * lengths[k] * rng.random_range(-1.0..=1.0));
    Move { axis, angle_deg, shift }
}

fn apply_move(emitter: &mut AtomicStructure, m: &Move) {
    let com = emitter.center_of_mass();
    emitter.rotate_about(&com, &m.axis, m.angle_deg.to_radians());
    emitter.translate(&m.shift);
}

// lives for one trial and is moved straight into the accepted list
#[allow(clippy::large_enum_variant)]
enum Verdict {
    Accept(EmbeddingTrial),
    Containment,
    RemovalCount,
}

struct Context<'a> {
    host: &'a AtomicStructure,
    members: Vec<Vec<usize>>,
    labels: &'a MoleculeLabels,
    cfg: &'a EmbeddingConfig,
}

impl Context<'_> {
    fn evaluate(&self, trial: usize, emitter: &AtomicStructure, m: &Move) -> Verdict {
        let c2 = self.cfg.cutoff * self.cfg.cutoff;
        let (elo, ehi) = emitter.bounding_box();
        let mut removed = BTreeSet::new();
        for (i, p) in self.host.positions.iter().enumerate() {
            let lbl = self.labels.labels[i];
            if removed.contains(&lbl) {
                continue;
            }
            // cheap box rejection before the pairwise scan
            let far = (0..3).any(|k| p[k] < elo[k] - self.cfg.cutoff || p[k] > ehi[k] + self.cfg.cutoff);
            if far {
                continue;
            }
            if emitter.positions.iter().any(|q| (q - p).norm_squared() < c2) {
                removed.insert(lbl);
            }
        }
        let count = removed.len();
        if count < self.cfg.min_removed || count > self.cfg.max_removed {
            return Verdict::RemovalCount;
        }
        let mut keep = vec![true; self.host.len()];
        for &mol in &removed {
            for &i in &self.members[mol] {
                keep[i] = false;
            }
        }
        let host_indices: Vec<usize> = (0..self.host.len()).filter(|&i| keep[i]).collect();
        if host_indices.is_empty() {
            return Verdict::Containment;
        }
        let mut combined = self.host.subset(&host_indices);
        let (hlo, hhi) = combined.bounding_box();
        let inside = (0..3).all(|k| elo[k] > hlo[k] && ehi[k] < hhi[k]);
        if !inside {
            return Verdict::Containment;
        }
        combined.extend(emitter);
        let com = emitter.center_of_mass();
        Verdict::Accept(EmbeddingTrial {
            trial,
            structure: combined,
            host_indices,
            removed_molecules: removed.into_iter().collect(),
            rotation_axis: m.axis.into(),
            rotation_angle_deg: m.angle_deg,
            translation: m.shift.into(),
            emitter_center: com.into(),
            accepted: true,
        })
    }
}

/// Emitter copy with its center of mass moved onto the host's.
pub fn center_emitter(host: &AtomicStructure, emitter: &AtomicStructure) -> AtomicStructure {
    let mut e = emitter.clone();
    e.translate(&(host.center_of_mass() - emitter.center_of_mass()));
    e.cell = host.cell;
    e.pbc = [false; 3];
    e
}

/// Runs insertion trials until every removal count in
/// `[min_removed, max_removed]` holds `per_count` structures or
/// `max_trials` trials have been made.
///
/// Overlap and containment use plain Cartesian distances and coordinates.
/// Each trial starts from the full host; deletions do not carry over.
pub fn embed_emitter(
    host: &AtomicStructure,
    emitter: &AtomicStructure,
    cfg: &EmbeddingConfig,
) -> Result<EmbeddingOutcome, EmbeddingError> {
    cfg.validate()?;
    let lengths = host.cell_lengths().ok_or(EmbeddingError::HostWithoutCell)?;
    let (hlo, hhi) = host.bounding_box();
    let (elo, ehi) = emitter.bounding_box();
    let (hx, ex) = (hhi - hlo, ehi - elo);
    if (0..3).any(|k| ex[k] >= hx[k]) {
        return Err(EmbeddingError::EmitterTooLarge {
            emitter: ex.into(),
            host: hx.into(),
        });
    }
    let labels = identify_molecules(host);
    let ctx = Context {
        host,
        members: labels.members(),
        labels: &labels,
        cfg,
    };
    let start = center_emitter(host, emitter);
    let quota_slots = cfg.max_removed - cfg.min_removed + 1;
    let mut filled = vec![0usize; quota_slots];
    let mut stats = TrialStats::default();
    let mut accepted = Vec::new();

    let mut record = |v: Verdict, stats: &mut TrialStats, filled: &mut Vec<usize>| {
        stats.trials += 1;
        match v {
            Verdict::Accept(t) => {
                let slot = t.removed_count() - cfg.min_removed;
                if filled[slot] < cfg.per_count {
                    filled[slot] += 1;
                    stats.accepted += 1;
                    accepted.push(t);
                } else {
                    stats.rejected_quota_full += 1;
                }
            }
            Verdict::Containment => stats.rejected_containment += 1,
            Verdict::RemovalCount => stats.rejected_removal_count += 1,
        }
        filled.iter().all(|&f| f >= cfg.per_count)
    };

    if cfg.fresh_each_trial {
        // independent trials in parallel batches, one RNG stream per trial
        let batch = rayon::current_num_threads().max(1) * 8;
        let mut next = 0;
        'outer: while next < cfg.max_trials {
            let end = (next + batch).min(cfg.max_trials);
            let verdicts: Vec<Verdict> = (next..end)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(t as u64);
                    let m = draw_move(&mut rng, &lengths, cfg.translation_scale);
                    let mut e = start.clone();
                    apply_move(&mut e, &m);
                    ctx.evaluate(t, &e, &m)
                })
                .collect();
            for v in verdicts {
                if record(v, &mut stats, &mut filled) {
                    break 'outer;
                }
            }
            next = end;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut e = start;
        for t in 0..cfg.max_trials {
            let m = draw_move(&mut rng, &lengths, cfg.translation_scale);
            apply_move(&mut e, &m);
            if record(ctx.evaluate(t, &e, &m), &mut stats, &mut filled) {
                break;
            }
        }
    }
    if accepted.is_empty() {
        log::warn!("no insertion accepted after {} trials", stats.trials);
    }
    Ok(EmbeddingOutcome {
        accepted,
        stats,
        host_molecules: labels,
    })
}

/// Independent post-hoc check of an accepted trial: separation, strict
/// containment and whole-molecule deletion. Returns a description of the
/// first violation.
pub fn check_trial(
    host: &AtomicStructure,
    labels: &MoleculeLabels,
    trial: &EmbeddingTrial,
    cutoff: f64,
) -> Result<(), String> {
    let nh = trial.host_indices.len();
    let (hpart, epart) = trial.structure.positions.split_at(nh);
    for (a, &orig) in hpart.iter().zip(&trial.host_indices) {
        if *a != host.positions[orig] {
            return Err(format!("host atom {orig} moved"));
        }
        for b in epart {
            if (a - b).norm() < cutoff {
                return Err(format!("host atom {orig} within {cutoff} Å of emitter"));
            }
        }
    }
    for k in 0..3 {
        let hmin = hpart.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hmax = hpart.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        let emin = epart.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let emax = epart.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        if !(emin > hmin && emax < hmax) {
            return Err(format!("emitter not strictly inside host along axis {k}"));
        }
    }
    let kept: BTreeSet<usize> = trial.host_indices.iter().copied().collect();
    for mol in 0..labels.count {
        let atoms: Vec<usize> = (0..host.len()).filter(|&i| labels.labels[i] == mol).collect();
        let present = atoms.iter().filter(|i| kept.contains(i)).count();
        if present != 0 && present != atoms.len() {
            return Err(format!("molecule {mol} partially deleted"));
        }
    }
    Ok(())
}
