use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use spescreen_core::potential::{hessian_finite_difference, relax, PotentialSpec, RelaxOptions, DEFAULT_FD_STEP};
use spescreen_core::structure::{parse_xyz, xyz_string};
use spescreen_core::vibronic::{normal_modes, ModeFile, DEFAULT_FREQUENCY_FLOOR_CM1};

use super::{default_potential, Ctx};
use crate::artifacts::{csv_text, num, Artifacts};
use crate::error::{CliError, StageExt};

const STAGE: &str = "modes";

#[derive(Debug, Args)]
pub struct ModesArgs {
    /// Structure (XYZ)
    #[arg(long)]
    pub structure: Option<PathBuf>,
    /// Energy, forces and optional Hessian from an external calculation (JSON)
    #[arg(long)]
    pub external: Option<PathBuf>,
    /// Finite-difference step (Å, default 0.01)
    #[arg(long)]
    pub step: Option<f64>,
    /// Relax the structure before the Hessian
    #[arg(long)]
    pub relax: bool,
    /// Force threshold for relaxation (eV/Å, default 1e-4)
    #[arg(long)]
    pub fmax: Option<f64>,
    /// Mode file name, relative to the output directory (default modes.json)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Params {
    structure: PathBuf,
    potential: PotentialSpec,
    step: f64,
    relax: Option<RelaxOptions>,
}

#[derive(Debug, Serialize)]
struct Summary {
    atoms: usize,
    hessian_source: &'static str,
    hessian_asymmetry: Option<f64>,
    relaxed: Option<RelaxSummary>,
    /// Imaginary modes stronger than the rigid-body floor; nonzero means a saddle point.
    imaginary_modes: usize,
    frequencies_cm1: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct RelaxSummary {
    #[serde(rename = "energy_eV")]
    energy: f64,
    max_force: f64,
    iterations: usize,
    converged: bool,
}

pub fn run(ctx: &Ctx, a: &ModesArgs) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.cfg.modes;
    let path = ctx.path(STAGE, &a.structure, &c.structure, "structure")?;
    let potential = match &a.external {
        Some(p) => PotentialSpec::External { path: p.clone() },
        None => c.potential.clone().unwrap_or_else(default_potential),
    };
    let step = a.step.or(c.step).unwrap_or(DEFAULT_FD_STEP);
    let relax_opts = (a.relax || c.relax.unwrap_or(false))
        .then(|| RelaxOptions { fmax: a.fmax.or(c.fmax).unwrap_or(1e-4), ..Default::default() });
    let (dir, name) = ctx.primary(&a.out, "modes.json");
    let mut arts = Artifacts::new(STAGE, dir);
    let text = arts.read_input_string(&path)?;
    let mut s = parse_xyz(&text).map_err(|e| CliError::validation(STAGE, format!("{}: {e}", path.display())))?;
    if let PotentialSpec::External { path } = &potential {
        arts.read_input(path)?;
    }
    // the harmonic toy takes its equilibrium from the input geometry
    let pot = potential.build(&s).stage(STAGE)?;

    let mut relaxed = None;
    if let Some(opts) = &relax_opts {
        if pot.is_static() {
            return Err(CliError::validation(STAGE, "tabulated external data cannot be relaxed"));
        }
        let r = relax(&s, pot.as_ref(), opts).stage(STAGE)?;
        if !r.converged {
            return Err(CliError::numerical(STAGE, format!("relaxation stopped at max force {:.3e} eV/Å", r.max_force)));
        }
        relaxed = Some(RelaxSummary { energy: r.energy, max_force: r.max_force, iterations: r.iterations, converged: r.converged });
        s = r.structure;
        arts.add("relaxed.xyz", xyz_string(&s, "relaxed"));
    }
    let (hessian, source, asym) = match pot.provided_hessian(&s) {
        Some(h) => (h, "provided", None),
        None => {
            if pot.is_static() {
                return Err(CliError::validation(STAGE, "external data has no Hessian and cannot be displaced"));
            }
            let fd = hessian_finite_difference(&s, pot.as_ref(), step).stage(STAGE)?;
            (fd.matrix, "finite-difference", Some(fd.asymmetry))
        }
    };
    let set = normal_modes(&hessian, &s.masses).stage(STAGE)?;
    let freqs = set.frequencies_cm1();
    let rows = freqs.iter().enumerate().map(|(k, f)| vec![k.to_string(), num(*f)]);
    arts.add("frequencies.csv", csv_text(&["mode", "frequency_cm1"], rows)?);
    arts.add_json(name, &ModeFile::from_mode_set(&set))?;
    arts.add_json(
        "modes_summary.json",
        &Summary {
            atoms: s.len(),
            hessian_source: source,
            hessian_asymmetry: asym,
            relaxed,
            imaginary_modes: (0..set.n_modes()).filter(|&k| set.frequency_cm1(k) < -DEFAULT_FREQUENCY_FLOOR_CM1).count(),
            frequencies_cm1: freqs,
        },
    )?;
    arts.commit(None, &Params { structure: path, potential, step, relax: relax_opts })
}
