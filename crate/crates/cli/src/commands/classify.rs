use std::path::{Path, PathBuf};

use clap::Args;
use nalgebra::DMatrix;
use serde::Serialize;
use spescreen_core::ml::{label_good, pca, FeatureMatrix, GpcModel, GpcOptions, PcaResult};
use spescreen_core::spectro::{read_records_csv, CandidateRecord};

use super::Ctx;
use crate::artifacts::{csv_text, num, Artifacts};
use crate::error::{CliError, StageExt};

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Candidate records (CSV in summary-table column order)
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Host absorption wavelength (nm); candidates must absorb to the red of it
    #[arg(long)]
    pub lambda_host: Option<f64>,
    /// Leave the spin-orbit condition out of the labels
    #[arg(long)]
    pub no_soc: bool,
    /// Label file, relative to the output directory (default labels.csv)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub label: LabelArgs,
    /// Points per axis of the probability grid (default 50)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Keep the kernel hyperparameters at σ² = 1, ℓ = 1
    #[arg(long)]
    pub no_optimize: bool,
}

#[derive(Debug, Serialize)]
struct LabelParams {
    records: PathBuf,
    lambda_host_nm: f64,
    include_soc: bool,
}

#[derive(Debug, Serialize)]
struct ClassifyParams {
    #[serde(flatten)]
    label: LabelParams,
    grid: usize,
    optimize: bool,
}

#[derive(Debug, Serialize)]
struct LabelSummary<'a> {
    lambda_host_nm: f64,
    include_soc: bool,
    mean_fosc_em: f64,
    mean_svc: f64,
    mean_soc: f64,
    good: usize,
    total: usize,
    ids: &'a [String],
    labels: &'a [bool],
}

pub struct Labeled {
    pub records: Vec<CandidateRecord>,
    pub labels: Vec<bool>,
    pub lambda_host_nm: f64,
    pub include_soc: bool,
}

pub fn read_records(stage: &'static str, arts: &mut Artifacts, path: &Path) -> Result<Vec<CandidateRecord>, CliError> {
    let bytes = arts.read_input(path)?;
    let records = read_records_csv(bytes.as_slice()).map_err(|e| CliError::validation(stage, format!("{}: {e}", path.display())))?;
    if records.is_empty() {
        return Err(CliError::validation(stage, format!("{} holds no records", path.display())));
    }
    Ok(records)
}

fn labeled(stage: &'static str, ctx: &Ctx, a: &LabelArgs, arts: &mut Artifacts) -> Result<(Labeled, LabelParams), CliError> {
    let c = &ctx.cfg.label;
    let path = ctx.path(stage, &a.records, &c.records, "records")?;
    let lambda = a
        .lambda_host
        .or(c.lambda_host_nm)
        .ok_or_else(|| CliError::validation(stage, "--lambda-host is required (or set label.lambda_host_nm)"))?;
    let include_soc = !a.no_soc && c.include_soc.unwrap_or(true);
    let records = read_records(stage, arts, &path)?;
    let labels = label_good(&records, lambda, include_soc).stage(stage)?;
    let params = LabelParams { records: path, lambda_host_nm: lambda, include_soc };
    Ok((Labeled { records, labels, lambda_host_nm: lambda, include_soc }, params))
}

pub fn run_label(ctx: &Ctx, a: &LabelArgs) -> Result<Vec<PathBuf>, CliError> {
    const STAGE: &str = "label";
    let (dir, name) = ctx.primary(&a.out, "labels.csv");
    let mut arts = Artifacts::new(STAGE, dir);
    let (l, params) = labeled(STAGE, ctx, a, &mut arts)?;
    let rows = l.records.iter().zip(&l.labels).map(|(r, g)| vec![r.id.clone(), g.to_string()]);
    arts.add(name, csv_text(&["id", "good"], rows)?);
    let n = l.records.len() as f64;
    let mean = |f: fn(&CandidateRecord) -> f64| l.records.iter().map(f).sum::<f64>() / n;
    let ids: Vec<String> = l.records.iter().map(|r| r.id.clone()).collect();
    arts.add_json(
        "label.json",
        &LabelSummary {
            lambda_host_nm: l.lambda_host_nm,
            include_soc: l.include_soc,
            mean_fosc_em: mean(|r| r.fosc_em),
            mean_svc: mean(|r| r.svc),
            mean_soc: mean(|r| r.soc),
            good: l.labels.iter().filter(|&&g| g).count(),
            total: l.labels.len(),
            ids: &ids,
            labels: &l.labels,
        },
    )?;
    arts.commit(None, &params)
}

/// Labels, two principal components and a GP classifier on the scores.
pub struct Classification {
    pub pca: PcaResult,
    pub model: GpcModel,
    pub probabilities: Vec<f64>,
    /// (pc1, pc2, probability) over a regular grid covering the scores.
    pub grid: Vec<[f64; 3]>,
}

pub fn classify(stage: &'static str, l: &Labeled, grid: usize, optimize: bool) -> Result<Classification, CliError> {
    if grid < 2 {
        return Err(CliError::validation(stage, "--grid must be at least 2"));
    }
    let features = FeatureMatrix::from_records(&l.records).stage(stage)?;
    let pca = pca(&features.values, 2).stage(stage)?;
    let opts = GpcOptions { optimize, ..Default::default() };
    let model = GpcModel::fit(&pca.scores, &l.labels, &opts).stage(stage)?;
    let probabilities = model.predict_proba(&pca.scores).stage(stage)?;
    let span = |k: usize| {
        let col = pca.scores.column(k);
        let (lo, hi) = (col.min(), col.max());
        let pad = 0.1 * (hi - lo).max(1e-9);
        (lo - pad, hi + pad)
    };
    let ((x0, x1), (y0, y1)) = (span(0), span(1));
    let at = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (grid - 1) as f64;
    let pts = DMatrix::from_fn(grid * grid, 2, |r, k| if k == 0 { at(x0, x1, r % grid) } else { at(y0, y1, r / grid) });
    let p = model.predict_proba(&pts).stage(stage)?;
    let grid = (0..grid * grid).map(|r| [pts[(r, 0)], pts[(r, 1)], p[r]]).collect();
    Ok(Classification { pca, model, probabilities, grid })
}

#[derive(Debug, Serialize)]
struct ClassifySummary<'a> {
    features: Vec<&'a str>,
    components: Vec<Vec<f64>>,
    explained_ratio: &'a [f64],
    amplitude: f64,
    length_scale: f64,
    log_marginal_likelihood: f64,
    good: usize,
    total: usize,
}

pub fn grid_csv(c: &Classification) -> Result<Vec<u8>, CliError> {
    csv_text(&["pc1", "pc2", "probability"], c.grid.iter().map(|g| g.iter().map(|v| num(*v)).collect()))
}

pub fn scores_csv(l: &Labeled, c: &Classification) -> Result<Vec<u8>, CliError> {
    let rows = (0..l.records.len()).map(|i| {
        vec![
            l.records[i].id.clone(),
            l.labels[i].to_string(),
            num(c.pca.scores[(i, 0)]),
            num(c.pca.scores[(i, 1)]),
            num(c.probabilities[i]),
        ]
    });
    csv_text(&["id", "good", "pc1", "pc2", "probability"], rows)
}

pub fn summary_json(arts: &mut Artifacts, name: &str, l: &Labeled, c: &Classification) -> Result<(), CliError> {
    let names = spescreen_core::ml::FEATURE_NAMES;
    arts.add_json(
        name.to_string(),
        &ClassifySummary {
            features: c.pca.standardized.retained.iter().map(|&j| names[j]).collect(),
            components: c.pca.components.column_iter().map(|col| col.iter().copied().collect()).collect(),
            explained_ratio: &c.pca.explained_ratio,
            amplitude: c.model.amplitude,
            length_scale: c.model.length_scale,
            log_marginal_likelihood: c.model.posterior.log_marginal_likelihood,
            good: l.labels.iter().filter(|&&g| g).count(),
            total: l.labels.len(),
        },
    )
}

pub fn run_classify(ctx: &Ctx, a: &ClassifyArgs) -> Result<Vec<PathBuf>, CliError> {
    const STAGE: &str = "classify";
    let (dir, name) = ctx.primary(&a.label.out, "labels.csv");
    let mut arts = Artifacts::new(STAGE, dir);
    let (l, label) = labeled(STAGE, ctx, &a.label, &mut arts)?;
    let grid = a.grid.or(ctx.cfg.classify.grid).unwrap_or(50);
    let optimize = !a.no_optimize && ctx.cfg.classify.optimize.unwrap_or(true);
    let c = classify(STAGE, &l, grid, optimize)?;
    arts.add(name, scores_csv(&l, &c)?);
    arts.add("classify_grid.csv", grid_csv(&c)?);
    summary_json(&mut arts, "classify.json", &l, &c)?;
    arts.commit(None, &ClassifyParams { label, grid, optimize })
}
