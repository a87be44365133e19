use std::collections::HashMap;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use spescreen_core::chem::fingerprint::{DEFAULT_NBITS, DEFAULT_RADIUS};
use spescreen_core::chem::similarity::{log_histogram, rank_by_similarity, SimilaritySummary};
use spescreen_core::chem::{detect_delimiter, morgan_fingerprint, parse_smiles, parse_smiles_table, Fingerprint, SkippedRow, SmilesTable};

use super::Ctx;
use crate::artifacts::{csv_text, num, Artifacts};
use crate::error::{CliError, StageExt};

const STAGE: &str = "similarity";

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    /// SMILES table, CSV or TSV with `id` and `smiles` columns
    #[arg(long)]
    pub smiles: Option<PathBuf>,
    /// Reference molecule as SMILES
    #[arg(long, conflicts_with = "reference_id")]
    pub reference: Option<String>,
    /// Use the table row with this id as the reference
    #[arg(long)]
    pub reference_id: Option<String>,
    /// Morgan radius (default 2)
    #[arg(long)]
    pub radius: Option<u32>,
    /// Fingerprint length in bits (default 1024)
    #[arg(long)]
    pub nbits: Option<usize>,
    /// Histogram bins over [0, 1] (default 20)
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Params {
    smiles: PathBuf,
    reference: String,
    reference_id: Option<String>,
    radius: u32,
    nbits: usize,
    bins: usize,
}

#[derive(Debug, Serialize)]
struct HistogramBin {
    lower: f64,
    upper: f64,
    count: usize,
    log10_count: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    reference: &'a str,
    reference_id: Option<&'a str>,
    radius: u32,
    nbits: usize,
    statistics: &'a SimilaritySummary,
    histogram: Vec<HistogramBin>,
    skipped: &'a [SkippedRow],
}

/// Reads a SMILES table and records it as a stage input.
pub fn load_table(stage: &'static str, arts: &mut Artifacts, path: &std::path::Path) -> Result<SmilesTable, CliError> {
    let text = arts.read_input_string(path)?;
    let table = parse_smiles_table(&text, detect_delimiter(path, &text)).stage(stage)?;
    for s in &table.skipped {
        log::warn!("{}: line {} ({}) skipped: {}", path.display(), s.line, s.id, s.reason);
    }
    if table.entries.is_empty() {
        return Err(CliError::validation(stage, format!("{} has no usable rows", path.display())));
    }
    Ok(table)
}

pub fn fingerprints(stage: &'static str, table: &SmilesTable, radius: u32, nbits: usize) -> Result<Vec<Fingerprint>, CliError> {
    table.entries.par_iter().map(|e| morgan_fingerprint(&e.graph, radius, nbits)).collect::<Result<Vec<_>, _>>().stage(stage)
}

pub fn run(ctx: &Ctx, a: &SimilarityArgs) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.cfg;
    let path = ctx.path(STAGE, &a.smiles, &c.similarity.smiles, "smiles")?;
    let radius = a.radius.or(c.fingerprint.radius).unwrap_or(DEFAULT_RADIUS);
    let nbits = a.nbits.or(c.fingerprint.nbits).unwrap_or(DEFAULT_NBITS);
    let bins = a.bins.or(c.similarity.bins).unwrap_or(20);
    if bins == 0 {
        return Err(CliError::validation(STAGE, "--bins must be at least 1"));
    }
    let mut arts = Artifacts::new(STAGE, &ctx.out_dir);
    let table = load_table(STAGE, &mut arts, &path)?;

    let mut smiles_of: HashMap<&str, &str> = HashMap::new();
    for e in &table.entries {
        if smiles_of.insert(&e.id, &e.smiles).is_some() {
            return Err(CliError::validation(STAGE, format!("duplicate id `{}`", e.id)));
        }
    }
    let reference_id = a.reference_id.clone().or_else(|| if a.reference.is_some() { None } else { c.similarity.reference_id.clone() });
    let reference = match (&a.reference, &reference_id) {
        (Some(s), _) => s.clone(),
        (None, Some(id)) => smiles_of
            .get(id.as_str())
            .map(|s| s.to_string())
            .ok_or_else(|| CliError::validation(STAGE, format!("no row with id `{id}`")))?,
        (None, None) => c
            .similarity
            .reference
            .clone()
            .ok_or_else(|| CliError::validation(STAGE, "--reference or --reference-id is required"))?,
    };
    let ref_fp = morgan_fingerprint(&parse_smiles(&reference).stage(STAGE)?, radius, nbits).stage(STAGE)?;
    let fps = fingerprints(STAGE, &table, radius, nbits)?;
    let db: Vec<(String, Fingerprint)> = table.entries.iter().map(|e| e.id.clone()).zip(fps).collect();
    let ranking = rank_by_similarity(&ref_fp, &db).stage(STAGE)?;

    let rows = ranking.entries.iter().map(|e| vec![e.id.clone(), smiles_of[e.id.as_str()].to_string(), num(e.similarity)]);
    arts.add("ranking.csv", csv_text(&["id", "smiles", "tanimoto"], rows)?);
    let sims: Vec<f64> = ranking.entries.iter().map(|e| e.similarity).collect();
    let histogram = log_histogram(&sims, bins)
        .into_iter()
        .map(|(lower, count, log10_count)| HistogramBin { lower, upper: lower + 1.0 / bins as f64, count, log10_count })
        .collect();
    let summary = Summary {
        reference: &reference,
        reference_id: reference_id.as_deref(),
        radius,
        nbits,
        statistics: &ranking.summary,
        histogram,
        skipped: &table.skipped,
    };
    arts.add_json("similarity.json", &summary)?;
    arts.commit(None, &Params { smiles: path, reference: reference.clone(), reference_id, radius, nbits, bins })
}
