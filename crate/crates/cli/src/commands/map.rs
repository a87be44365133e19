use std::path::PathBuf;

use clap::Args;
use nalgebra::DMatrix;
use serde::Serialize;
use spescreen_core::chem::fingerprint::{DEFAULT_NBITS, DEFAULT_RADIUS};
use spescreen_core::ml::{density_cluster, jaccard_distance_matrix, tsne, ClusterSelection, TsneOptions};

use super::similarity::{fingerprints, load_table};
use super::Ctx;
use crate::artifacts::{csv_text, num, Artifacts};
use crate::error::{CliError, StageExt};

const STAGE: &str = "map";

fn parse_selection(s: &str) -> Result<ClusterSelection, String> {
    match s {
        "leaf" => Ok(ClusterSelection::Leaf),
        "eom" => Ok(ClusterSelection::Eom),
        other => Err(format!("unknown selection `{other}` (leaf or eom)")),
    }
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// SMILES table, CSV or TSV with `id` and `smiles` columns
    #[arg(long)]
    pub smiles: Option<PathBuf>,
    /// t-SNE perplexity (default 50)
    #[arg(long)]
    pub perplexity: Option<f64>,
    /// t-SNE iterations (default 1000)
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Smallest cluster kept by HDBSCAN (default 5)
    #[arg(long)]
    pub min_cluster_size: Option<usize>,
    /// Cluster selection: leaf or eom (default leaf)
    #[arg(long, value_parser = parse_selection)]
    pub selection: Option<ClusterSelection>,
    /// Morgan radius (default 2)
    #[arg(long)]
    pub radius: Option<u32>,
    /// Fingerprint length in bits (default 1024)
    #[arg(long)]
    pub nbits: Option<usize>,
    /// Map file, relative to the output directory (default map.csv)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Params {
    smiles: PathBuf,
    perplexity: f64,
    iterations: usize,
    min_cluster_size: usize,
    selection: ClusterSelection,
    radius: u32,
    nbits: usize,
}

#[derive(Debug, Serialize)]
struct MapSummary {
    points: usize,
    perplexity: f64,
    kl_divergence: f64,
    kl_history: Vec<(usize, f64)>,
    iterations: usize,
    clusters: usize,
    noise: usize,
}

pub fn run(ctx: &Ctx, a: &MapArgs) -> Result<Vec<PathBuf>, CliError> {
    let c = &ctx.cfg;
    let path = ctx.path(STAGE, &a.smiles, &c.map.smiles, "smiles")?;
    let p = Params {
        smiles: path.clone(),
        perplexity: a.perplexity.or(c.map.perplexity).unwrap_or(50.0),
        iterations: a.iterations.or(c.map.iterations).unwrap_or(1000),
        min_cluster_size: a.min_cluster_size.or(c.map.min_cluster_size).unwrap_or(5),
        selection: a.selection.or(c.map.selection).unwrap_or_default(),
        radius: a.radius.or(c.fingerprint.radius).unwrap_or(DEFAULT_RADIUS),
        nbits: a.nbits.or(c.fingerprint.nbits).unwrap_or(DEFAULT_NBITS),
    };
    let (dir, name) = ctx.primary(&a.out, "map.csv");
    let mut arts = Artifacts::new(STAGE, dir);
    let table = load_table(STAGE, &mut arts, &path)?;
    let fps = fingerprints(STAGE, &table, p.radius, p.nbits)?;
    let d = jaccard_distance_matrix(&fps).stage(STAGE)?;
    let opts = TsneOptions { perplexity: p.perplexity, iterations: p.iterations, seed: ctx.seed, ..Default::default() };
    let emb = tsne(&d, &opts).stage(STAGE)?;
    let coords: DMatrix<f64> = emb.coords.columns(0, 2).into_owned();
    let clusters = density_cluster(&coords, p.min_cluster_size, None, p.selection).stage(STAGE)?;

    let rows = (0..coords.nrows()).map(|i| {
        vec![num(coords[(i, 0)]), num(coords[(i, 1)]), clusters.labels[i].to_string(), table.entries[i].id.clone()]
    });
    arts.add(name, csv_text(&["x", "y", "cluster", "id"], rows)?);
    arts.add_json(
        "map.json",
        &MapSummary {
            points: coords.nrows(),
            perplexity: emb.perplexity,
            kl_divergence: emb.kl_divergence,
            kl_history: emb.kl_history.clone(),
            iterations: emb.iterations,
            clusters: clusters.n_clusters,
            noise: clusters.noise_count(),
        },
    )?;
    arts.commit(Some(ctx.seed), &p)
}
