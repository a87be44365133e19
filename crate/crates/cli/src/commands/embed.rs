use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use spescreen_core::embedding::{embed_emitter, select_most_stable, EmbeddingConfig, TrialStats};
use spescreen_core::potential::{PotentialSpec, RelaxOptions};
use spescreen_core::structure::{parse_xyz, xyz_string};
use spescreen_core::AtomicStructure;

use super::{default_potential, Ctx};
use crate::artifacts::Artifacts;
use crate::error::{CliError, StageExt};

const STAGE: &str = "embed";

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Host supercell (extended XYZ with a Lattice)
    #[arg(long)]
    pub host: Option<PathBuf>,
    /// Emitter molecule (XYZ)
    #[arg(long)]
    pub emitter: Option<PathBuf>,
    /// Host atoms closer than this to the emitter remove their molecule (Å, default 1.0)
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Fewest host molecules removed (default 2)
    #[arg(long)]
    pub min_removed: Option<usize>,
    /// Most host molecules removed (default 5)
    #[arg(long)]
    pub max_removed: Option<usize>,
    /// Accepted structures kept per removal count (default 25)
    #[arg(long)]
    pub per_count: Option<usize>,
    /// Trial insertions before giving up (default 10000)
    #[arg(long)]
    pub max_trials: Option<usize>,
    /// Random translation per trial as a fraction of the cell lengths (default 0.05)
    #[arg(long)]
    pub translation_scale: Option<f64>,
    /// Start every trial from the centered emitter instead of a random walk
    #[arg(long)]
    pub fresh: bool,
    /// Skip relaxation and binding energies
    #[arg(long)]
    pub no_relax: bool,
    /// Force threshold for relaxation (eV/Å, default 0.05)
    #[arg(long)]
    pub fmax: Option<f64>,
    /// Relaxation step limit (default 1000)
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Params {
    host: PathBuf,
    emitter: PathBuf,
    embedding: EmbeddingConfig,
    relax: Option<RelaxParams>,
}

#[derive(Debug, Serialize)]
struct RelaxParams {
    options: RelaxOptions,
    potential: PotentialSpec,
}

#[derive(Debug, Serialize)]
struct TrialRow {
    file: String,
    trial: usize,
    removed_count: usize,
    removed_molecules: Vec<usize>,
    rotation_axis: [f64; 3],
    rotation_angle_deg: f64,
    translation: [f64; 3],
    emitter_center: [f64; 3],
    #[serde(rename = "relaxed_energy_eV")]
    relaxed_energy: Option<f64>,
    #[serde(rename = "binding_energy_eV")]
    binding_energy: Option<f64>,
    converged: Option<bool>,
}

#[derive(Debug, Serialize)]
struct Best {
    trial: usize,
    file: String,
    #[serde(rename = "binding_energy_eV")]
    binding_energy: f64,
    relaxed_file: String,
}

#[derive(Debug, Serialize)]
struct Report {
    stats: TrialStats,
    removal_histogram: Vec<(usize, usize)>,
    host_molecules: usize,
    #[serde(rename = "emitter_energy_eV")]
    emitter_energy: Option<f64>,
    #[serde(rename = "supercell_energy_eV")]
    supercell_energy: Option<f64>,
    best: Option<Best>,
    trials: Vec<TrialRow>,
}

fn read_structure(arts: &mut Artifacts, path: &std::path::Path) -> Result<AtomicStructure, CliError> {
    let text = arts.read_input_string(path)?;
    parse_xyz(&text).map_err(|e| CliError::validation(STAGE, format!("{}: {e}", path.display())))
}

pub fn run(ctx: &Ctx, a: &EmbedArgs) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.cfg.embed;
    let host_path = ctx.path(STAGE, &a.host, &c.host, "host")?;
    let emitter_path = ctx.path(STAGE, &a.emitter, &c.emitter, "emitter")?;
    let d = EmbeddingConfig::default();
    let cfg = EmbeddingConfig {
        cutoff: a.cutoff.or(c.cutoff).unwrap_or(d.cutoff),
        translation_scale: a.translation_scale.or(c.translation_scale).unwrap_or(d.translation_scale),
        min_removed: a.min_removed.or(c.min_removed).unwrap_or(d.min_removed),
        max_removed: a.max_removed.or(c.max_removed).unwrap_or(d.max_removed),
        per_count: a.per_count.or(c.per_count).unwrap_or(d.per_count),
        max_trials: a.max_trials.or(c.max_trials).unwrap_or(d.max_trials),
        seed: ctx.seed,
        fresh_each_trial: a.fresh || c.fresh_each_trial.unwrap_or(false),
    };
    cfg.validate().stage(STAGE)?;
    let relax = (!a.no_relax && c.relax.unwrap_or(true)).then(|| RelaxParams {
        options: RelaxOptions {
            fmax: a.fmax.or(c.fmax).unwrap_or(0.05),
            max_steps: a.max_steps.or(c.max_steps).unwrap_or(RelaxOptions::default().max_steps),
            ..Default::default()
        },
        potential: c.potential.clone().unwrap_or_else(default_potential),
    });

    let mut arts = Artifacts::new(STAGE, &ctx.out_dir);
    let host = read_structure(&mut arts, &host_path)?;
    let emitter = read_structure(&mut arts, &emitter_path)?;
    let outcome = embed_emitter(&host, &emitter, &cfg).stage(STAGE)?;
    if outcome.accepted.is_empty() {
        return Err(CliError::numerical(STAGE, format!("no structure accepted in {} trials", outcome.stats.trials)));
    }
    let file_of = |k: usize| format!("complex_{k:04}.xyz");
    let mut rows: Vec<TrialRow> = outcome
        .accepted
        .iter()
        .enumerate()
        .map(|(k, t)| TrialRow {
            file: file_of(k),
            trial: t.trial,
            removed_count: t.removed_count(),
            removed_molecules: t.removed_molecules.clone(),
            rotation_axis: t.rotation_axis,
            rotation_angle_deg: t.rotation_angle_deg,
            translation: t.translation,
            emitter_center: t.emitter_center,
            relaxed_energy: None,
            binding_energy: None,
            converged: None,
        })
        .collect();
    for (k, t) in outcome.accepted.iter().enumerate() {
        arts.add(file_of(k), xyz_string(&t.structure, &format!("trial={} removed={}", t.trial, t.removed_count())));
    }

    let mut report = Report {
        stats: outcome.stats,
        removal_histogram: outcome.removal_histogram(&cfg),
        host_molecules: outcome.host_molecules.count,
        emitter_energy: None,
        supercell_energy: None,
        best: None,
        trials: Vec::new(),
    };
    if let Some(r) = &relax {
        let spec = &r.potential;
        let sel = select_most_stable(&outcome.accepted, &emitter, &host, |s| spec.build(s), &r.options).stage(STAGE)?;
        for (row, e) in rows.iter_mut().zip(&sel.energies) {
            row.relaxed_energy = e.relaxed_energy;
            row.binding_energy = e.binding_energy;
            row.converged = Some(e.converged);
        }
        report.emitter_energy = Some(sel.emitter_energy);
        report.supercell_energy = Some(sel.supercell_energy);
        let winner = &outcome.accepted[sel.index];
        report.best = Some(Best {
            trial: winner.trial,
            file: file_of(sel.index),
            binding_energy: sel.binding_energy,
            relaxed_file: "best_relaxed.xyz".into(),
        });
        arts.add(
            "best_relaxed.xyz",
            xyz_string(&sel.relaxed.structure, &format!("trial={} binding_energy_eV={}", winner.trial, sel.binding_energy)),
        );
    }
    report.trials = rows;
    arts.add_json("embed.json", &report)?;
    arts.commit(Some(ctx.seed), &Params { host: host_path, emitter: emitter_path, embedding: cfg, relax })
}
