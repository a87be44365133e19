use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use spescreen_core::spectro::{gssoc_metric, rsoc_metric, soc_metric, ExcitedStateTable};

use super::Ctx;
use crate::artifacts::Artifacts;
use crate::error::{CliError, StageExt};

const STAGE: &str = "spin";

#[derive(Debug, Args)]
pub struct SpinArgs {
    /// Excited-state tables (JSON); each file stem becomes the candidate id
    #[arg(long, num_args = 1..)]
    pub states: Vec<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Params {
    states: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpinRow {
    pub id: String,
    #[serde(rename = "s1_energy_eV")]
    pub s1_energy: f64,
    pub fosc_abs: f64,
    pub lambda_abs_nm: f64,
    pub fosc_em: Option<f64>,
    pub lambda_em_nm: Option<f64>,
    pub rotary: f64,
    pub soc: f64,
    pub rsoc: f64,
    pub gs_soc: Option<f64>,
    pub triplets_below_s1: usize,
}

pub fn spin_row(id: String, t: &ExcitedStateTable) -> Result<SpinRow, CliError> {
    let s1 = t.s1().stage(STAGE)?;
    Ok(SpinRow {
        id,
        s1_energy: s1.energy_ev,
        fosc_abs: s1.fosc,
        lambda_abs_nm: s1.lambda_nm,
        fosc_em: t.emission.as_ref().map(|e| e.fosc),
        lambda_em_nm: t.emission.as_ref().map(|e| e.lambda_nm),
        rotary: s1.rotary,
        soc: soc_metric(t).stage(STAGE)?,
        rsoc: rsoc_metric(t).stage(STAGE)?,
        gs_soc: t.gs_soc_t1_cm1.map(|_| gssoc_metric(t)).transpose().stage(STAGE)?,
        triplets_below_s1: t.triplets.iter().filter(|x| x.energy_ev <= s1.energy_ev).count(),
    })
}

pub fn run(ctx: &Ctx, a: &SpinArgs) -> Result<Vec<PathBuf>, CliError> {
    let paths = if a.states.is_empty() { ctx.cfg.at_all(&ctx.cfg.spin.states) } else { a.states.clone() };
    if paths.is_empty() {
        return Err(CliError::validation(STAGE, "--states needs at least one excited-state table"));
    }
    let mut arts = Artifacts::new(STAGE, &ctx.out_dir);
    let mut rows = Vec::new();
    for p in &paths {
        let text = arts.read_input_string(p)?;
        let t = ExcitedStateTable::from_json(&text).map_err(|e| CliError::validation(STAGE, format!("{}: {e}", p.display())))?;
        let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        if rows.iter().any(|r: &SpinRow| r.id == id) {
            return Err(CliError::validation(STAGE, format!("two tables share the id `{id}`")));
        }
        rows.push(spin_row(id, &t)?);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).stage(STAGE)?;
    }
    arts.add("spin.csv", w.into_inner().map_err(|e| CliError::validation(STAGE, e.to_string()))?);
    arts.add_json("spin.json", &rows)?;
    arts.commit(None, &Params { states: paths })
}
