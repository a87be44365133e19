use std::path::{Path, PathBuf};

use clap::Args;
use nalgebra::Vector3;
use serde::Serialize;
use spescreen_core::potential::ExternalData;
use spescreen_core::structure::parse_xyz;
use spescreen_core::vibronic::{
    harmonic_forces, vibronic_report, ForceWeighting, GeometryPair, ModeFile, NormalModeSet, VibronicOptions,
    DEFAULT_FREQUENCY_FLOOR_CM1,
};

use super::{parse_atom_list, Ctx};
use crate::artifacts::{csv_text, num, opt_num, Artifacts};
use crate::error::{CliError, StageExt};

const STAGE: &str = "vibronic";

fn parse_weighting(s: &str) -> Result<ForceWeighting, String> {
    match s {
        "cartesian" => Ok(ForceWeighting::Cartesian),
        "inverse-sqrt-mass" => Ok(ForceWeighting::InverseSqrtMass),
        other => Err(format!("unknown weighting `{other}` (cartesian or inverse-sqrt-mass)")),
    }
}

#[derive(Debug, Args)]
pub struct VibronicArgs {
    /// Mode file of the isolated emitter
    #[arg(long)]
    pub isolated: Option<PathBuf>,
    /// Mode file of the emitter-host complex
    #[arg(long)]
    pub embedded: Option<PathBuf>,
    /// Complex indices of the emitter atoms in emitter order, e.g. `120-155`
    /// (default: the last atoms of the complex)
    #[arg(long)]
    pub emitter_atoms: Option<String>,
    /// Excited-state forces on the emitter at the ground-state geometry (adapter JSON)
    #[arg(long)]
    pub forces: Option<PathBuf>,
    /// Ground-state emitter geometry (XYZ)
    #[arg(long)]
    pub ground: Option<PathBuf>,
    /// Excited-state emitter geometry (XYZ)
    #[arg(long)]
    pub excited: Option<PathBuf>,
    /// Modes below this wavenumber are treated as rigid-body motion (cm⁻¹, default 10)
    #[arg(long)]
    pub frequency_floor: Option<f64>,
    /// Force weighting: cartesian or inverse-sqrt-mass
    #[arg(long, value_parser = parse_weighting)]
    pub weighting: Option<ForceWeighting>,
}

#[derive(Debug, Serialize)]
struct Params {
    isolated: PathBuf,
    embedded: PathBuf,
    emitter_atoms: Vec<usize>,
    forces: Option<PathBuf>,
    ground: Option<PathBuf>,
    excited: Option<PathBuf>,
    force_source: &'static str,
    options: VibronicOptions,
}

fn read_modes(arts: &mut Artifacts, path: &Path) -> Result<NormalModeSet, CliError> {
    let text = arts.read_input_string(path)?;
    let file: ModeFile = serde_json::from_str(&text).map_err(|e| CliError::validation(STAGE, format!("{}: {e}", path.display())))?;
    file.into_mode_set().stage(STAGE)
}

fn read_positions(arts: &mut Artifacts, path: &Path, n: usize) -> Result<Vec<Vector3<f64>>, CliError> {
    let text = arts.read_input_string(path)?;
    let s = parse_xyz(&text).map_err(|e| CliError::validation(STAGE, format!("{}: {e}", path.display())))?;
    if s.len() != n {
        return Err(CliError::validation(STAGE, format!("{} has {} atoms, the emitter has {n}", path.display(), s.len())));
    }
    Ok(s.positions)
}

pub fn run(ctx: &Ctx, a: &VibronicArgs) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.cfg.vibronic;
    let iso_path = ctx.path(STAGE, &a.isolated, &c.isolated, "isolated")?;
    let emb_path = ctx.path(STAGE, &a.embedded, &c.embedded, "embedded")?;
    let forces_path = ctx.opt_path(&a.forces, &c.forces);
    let ground_path = ctx.opt_path(&a.ground, &c.ground);
    let excited_path = ctx.opt_path(&a.excited, &c.excited);
    let options = VibronicOptions {
        frequency_floor_cm1: a.frequency_floor.or(c.frequency_floor_cm1).unwrap_or(DEFAULT_FREQUENCY_FLOOR_CM1),
        force_weighting: a.weighting.unwrap_or_default(),
    };

    let mut arts = Artifacts::new(STAGE, &ctx.out_dir);
    let iso = read_modes(&mut arts, &iso_path)?;
    let emb = read_modes(&mut arts, &emb_path)?;
    let n = iso.n_atoms();
    let emitter_atoms = match a.emitter_atoms.as_ref().or(c.emitter_atoms.as_ref()) {
        Some(spec) => parse_atom_list(spec).map_err(|e| CliError::validation(STAGE, e))?,
        None => {
            let m = emb.n_atoms();
            if m < n {
                return Err(CliError::validation(STAGE, format!("complex has {m} atoms, fewer than the emitter's {n}")));
            }
            (m - n..m).collect()
        }
    };
    if emitter_atoms.len() != n {
        return Err(CliError::validation(STAGE, format!("{} emitter atoms given, the isolated emitter has {n}", emitter_atoms.len())));
    }
    for (i, &j) in emitter_atoms.iter().enumerate() {
        let (mi, mj) = (iso.masses[i], emb.masses.get(j).copied().unwrap_or(f64::NAN));
        if !((mi - mj).abs() < 1e-3) {
            return Err(CliError::validation(
                STAGE,
                format!("emitter atom {i} (mass {mi}) maps to complex atom {j} (mass {mj})"),
            ));
        }
    }
    let geometries = match (&ground_path, &excited_path) {
        (Some(g), Some(e)) => Some((read_positions(&mut arts, g, n)?, read_positions(&mut arts, e, n)?)),
        (None, None) => None,
        _ => return Err(CliError::validation(STAGE, "--ground and --excited go together")),
    };
    let (forces, force_source) = match (&forces_path, &geometries) {
        (Some(p), _) => {
            let text = arts.read_input_string(p)?;
            let data = ExternalData::from_json(&text).stage(STAGE)?;
            data.check_atoms(n).stage(STAGE)?;
            (data.forces_vec(), "external")
        }
        // excited surface approximated by the ground-state Hessian around the excited minimum
        (None, Some((g, e))) => (harmonic_forces(&iso.hessian().stage(STAGE)?, e, g), "harmonic"),
        (None, None) => return Err(CliError::validation(STAGE, "--forces or --ground with --excited is required")),
    };
    let pair = geometries.as_ref().map(|(g, e)| GeometryPair { ground: g, excited: e });
    let report = vibronic_report(&iso, &emb, &emitter_atoms, &forces, pair, &options).stage(STAGE)?;

    let rows = (0..report.frequencies_cm1.len()).map(|k| {
        vec![
            k.to_string(),
            num(report.frequencies_cm1[k]),
            report.included[k].to_string(),
            num(report.g[k]),
            num(report.projection_entropy[k]),
            opt_num(report.huang_rhys.as_ref().map(|s| s[k])),
            opt_num(report.weighted_hr.as_ref().map(|s| s[k])),
        ]
    });
    arts.add(
        "vibronic_modes.csv",
        csv_text(&["mode", "frequency_cm1", "included", "g", "projection_entropy", "huang_rhys", "weighted_hr"], rows)?,
    );
    arts.add_json("vibronic.json", &report)?;
    arts.commit(
        None,
        &Params {
            isolated: iso_path,
            embedded: emb_path,
            emitter_atoms,
            forces: forces_path,
            ground: ground_path,
            excited: excited_path,
            force_source,
            options,
        },
    )
}
