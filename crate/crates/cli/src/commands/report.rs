use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use spescreen_core::ml::label_good;
use spescreen_core::spectro::records_to_csv;

use super::classify::{classify, grid_csv, read_records, scores_csv, summary_json, Labeled};
use super::Ctx;
use crate::artifacts::{csv_text, num, opt_num, Artifacts};
use crate::error::{CliError, StageExt};

const STAGE: &str = "report";

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Candidate records (CSV in summary-table column order)
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Host absorption wavelength (nm); adds PC scores, labels and the probability grid
    #[arg(long)]
    pub lambda_host: Option<f64>,
    /// Leave the spin-orbit condition out of the labels
    #[arg(long)]
    pub no_soc: bool,
    /// Vibronic report for a candidate as ID=PATH; repeatable
    #[arg(long, value_parser = parse_pair)]
    pub vibronic: Vec<(String, PathBuf)>,
    /// Points per axis of the probability grid (default 50)
    #[arg(long)]
    pub grid: Option<usize>,
}

fn parse_pair(s: &str) -> Result<(String, PathBuf), String> {
    let (id, path) = s.split_once('=').ok_or_else(|| format!("expected ID=PATH, got `{s}`"))?;
    if id.is_empty() || path.is_empty() {
        return Err(format!("expected ID=PATH, got `{s}`"));
    }
    Ok((id.to_string(), PathBuf::from(path)))
}

#[derive(Debug, Serialize)]
struct Params {
    records: PathBuf,
    lambda_host_nm: Option<f64>,
    include_soc: bool,
    grid: usize,
    vibronic: BTreeMap<String, PathBuf>,
}

/// The fields of a vibronic report this stage uses.
#[derive(Debug, Deserialize)]
struct VibronicSums {
    svc: f64,
    sum_g: f64,
    sum_weighted_hr: Option<f64>,
}

const METRICS: [&str; 10] =
    ["fosc_abs", "fosc_em", "lambda_abs_nm", "lambda_em_nm", "rotary", "soc", "rsoc", "gs_soc", "svc", "e_bind_eV"];

pub fn run(ctx: &Ctx, a: &ReportArgs) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.cfg;
    let path = ctx.path(STAGE, &a.records, &c.report.records, "records")?;
    let lambda = a.lambda_host.or(c.label.lambda_host_nm);
    let include_soc = !a.no_soc && c.label.include_soc.unwrap_or(true);
    let grid = a.grid.or(c.classify.grid).unwrap_or(50);
    let mut vib: BTreeMap<String, PathBuf> =
        c.report.vibronic.iter().map(|(k, p)| (k.clone(), c.at(&Some(p.clone())).unwrap_or_default())).collect();
    vib.extend(a.vibronic.iter().cloned());

    let mut arts = Artifacts::new(STAGE, &ctx.out_dir);
    let records = read_records(STAGE, &mut arts, &path)?;
    arts.add("summary_table.csv", records_to_csv(&records).stage(STAGE)?);
    arts.add_json("summary_table.json", &records)?;

    let rows = records.iter().flat_map(|r| {
        let v = r.values();
        // values() leads with the Tanimoto index
        METRICS.iter().zip(&v[1..]).map(|(m, x)| vec![r.id.clone(), num(r.tanimoto), m.to_string(), num(*x)]).collect::<Vec<_>>()
    });
    arts.add("metrics_vs_tanimoto.csv", csv_text(&["id", "tanimoto", "metric", "value"], rows)?);

    if let Some(lambda) = lambda {
        let labels = label_good(&records, lambda, include_soc).stage(STAGE)?;
        let l = Labeled { records: records.clone(), labels, lambda_host_nm: lambda, include_soc };
        let cl = classify(STAGE, &l, grid, true)?;
        arts.add("pc_scores.csv", scores_csv(&l, &cl)?);
        arts.add("probability_grid.csv", grid_csv(&cl)?);
        summary_json(&mut arts, "classifier.json", &l, &cl)?;
    }

    if !vib.is_empty() {
        let mut rows = Vec::new();
        for (id, p) in &vib {
            if !records.iter().any(|r| &r.id == id) {
                return Err(CliError::validation(STAGE, format!("vibronic report for unknown id `{id}`")));
            }
            let text = arts.read_input_string(p)?;
            let s: VibronicSums = serde_json::from_str(&text).map_err(|e| CliError::validation(STAGE, format!("{}: {e}", p.display())))?;
            rows.push(vec![id.clone(), num(s.svc), num(s.sum_g), opt_num(s.sum_weighted_hr)]);
        }
        arts.add("vibronic_correlations.csv", csv_text(&["id", "svc", "sum_g", "sum_weighted_hr"], rows)?);
    }
    arts.commit(None, &Params { records: path, lambda_host_nm: lambda, include_soc, grid, vibronic: vib })
}
