use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use spescreen_core::spectro::{stark_coefficients, StarkCoefficients, StarkInput};

use super::Ctx;
use crate::artifacts::{csv_text, num, Artifacts};
use crate::error::{CliError, StageExt};

const STAGE: &str = "stark";

#[derive(Debug, Args)]
pub struct StarkArgs {
    /// |δμ| between S₁ and S₀ (e·a₀)
    #[arg(long, requires = "polarizability", allow_hyphen_values = true)]
    pub dipole: Option<f64>,
    /// δα between S₁ and S₀ (atomic units)
    #[arg(long, requires = "dipole", allow_hyphen_values = true)]
    pub polarizability: Option<f64>,
    /// Candidate id for --dipole/--polarizability
    #[arg(long, default_value = "candidate")]
    pub id: String,
    /// CSV with columns id, dipole_au, polarizability_au
    #[arg(long, conflicts_with = "dipole")]
    pub input: Option<PathBuf>,
    /// Fields for the shift table (kV/cm, comma separated; default 0,5,...,50)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub fields: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InputRow {
    id: String,
    dipole_au: f64,
    polarizability_au: f64,
}

#[derive(Debug, Serialize)]
struct OutputRow {
    id: String,
    dipole_au: f64,
    polarizability_au: f64,
    a_mhz_per_kv_cm: f64,
    b_mhz_per_kv2_cm2: f64,
}

#[derive(Debug, Serialize)]
struct Params {
    input: Option<PathBuf>,
    candidates: Vec<InputRow>,
    fields_kv_per_cm: Vec<f64>,
}

pub fn run(ctx: &Ctx, a: &StarkArgs) -> Result<Vec<PathBuf>, CliError> {
    let mut arts = Artifacts::new(STAGE, &ctx.out_dir);
    let input = a.input.clone().or_else(|| if a.dipole.is_some() { None } else { ctx.cfg.at(&ctx.cfg.stark.input) });
    let rows: Vec<InputRow> = match (a.dipole, a.polarizability, &input) {
        (Some(d), Some(p), _) => vec![InputRow { id: a.id.clone(), dipole_au: d, polarizability_au: p }],
        (_, _, Some(path)) => {
            let bytes = arts.read_input(path)?;
            csv::Reader::from_reader(bytes.as_slice()).deserialize().collect::<Result<_, _>>().stage(STAGE)?
        }
        _ => return Err(CliError::validation(STAGE, "--dipole with --polarizability, or --input, is required")),
    };
    if rows.is_empty() {
        return Err(CliError::validation(STAGE, "no candidates"));
    }
    if let Some(r) = rows.iter().find(|r| !(r.dipole_au.is_finite() && r.polarizability_au.is_finite())) {
        return Err(CliError::validation(STAGE, format!("non-finite input for `{}`", r.id)));
    }
    let fields = a
        .fields
        .clone()
        .or_else(|| ctx.cfg.stark.fields_kv_per_cm.clone())
        .unwrap_or_else(|| (0..=10).map(|k| 5.0 * k as f64).collect());
    if fields.iter().any(|f| !f.is_finite()) {
        return Err(CliError::validation(STAGE, "fields must be finite"));
    }

    let out: Vec<OutputRow> = rows
        .iter()
        .map(|r| {
            let c = stark_coefficients(&StarkInput { dipole_au: r.dipole_au, polarizability_au: r.polarizability_au });
            OutputRow {
                id: r.id.clone(),
                dipole_au: r.dipole_au,
                polarizability_au: r.polarizability_au,
                a_mhz_per_kv_cm: c.a,
                b_mhz_per_kv2_cm2: c.b,
            }
        })
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &out {
        w.serialize(r).stage(STAGE)?;
    }
    arts.add("stark.csv", w.into_inner().map_err(|e| CliError::validation(STAGE, e.to_string()))?);
    let shifts = out.iter().flat_map(|r| {
        let c = StarkCoefficients { a: r.a_mhz_per_kv_cm, b: r.b_mhz_per_kv2_cm2 };
        fields.iter().map(move |&e| vec![r.id.clone(), num(e), num(c.shift_mhz(e))])
    });
    arts.add("stark_shifts.csv", csv_text(&["id", "field_kv_per_cm", "shift_mhz"], shifts)?);
    arts.add_json("stark.json", &out)?;
    arts.commit(None, &Params { input, candidates: rows, fields_kv_per_cm: fields })
}
