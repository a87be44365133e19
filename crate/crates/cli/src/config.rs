//! TOML pipeline configuration. Every key is optional; command-line flags
//! take precedence, then the file, then built-in defaults. Relative paths
//! in the file are resolved against the file's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spescreen_core::ml::ClusterSelection;
use spescreen_core::potential::PotentialSpec;

use crate::error::{CliError, StageExt};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub fingerprint: FingerprintSection,
    pub similarity: SimilaritySection,
    pub map: MapSection,
    pub embed: EmbedSection,
    pub modes: ModesSection,
    pub vibronic: VibronicSection,
    pub spin: SpinSection,
    pub stark: StarkSection,
    pub label: LabelSection,
    pub classify: ClassifySection,
    pub report: ReportSection,
    #[serde(skip)]
    base: PathBuf,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FingerprintSection {
    pub radius: Option<u32>,
    pub nbits: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilaritySection {
    pub smiles: Option<PathBuf>,
    pub reference: Option<String>,
    pub reference_id: Option<String>,
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapSection {
    pub smiles: Option<PathBuf>,
    pub perplexity: Option<f64>,
    pub iterations: Option<usize>,
    pub min_cluster_size: Option<usize>,
    pub selection: Option<ClusterSelection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedSection {
    pub host: Option<PathBuf>,
    pub emitter: Option<PathBuf>,
    pub cutoff: Option<f64>,
    pub translation_scale: Option<f64>,
    pub min_removed: Option<usize>,
    pub max_removed: Option<usize>,
    pub per_count: Option<usize>,
    pub max_trials: Option<usize>,
    pub fresh_each_trial: Option<bool>,
    pub relax: Option<bool>,
    pub fmax: Option<f64>,
    pub max_steps: Option<usize>,
    pub potential: Option<PotentialSpec>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModesSection {
    pub structure: Option<PathBuf>,
    pub step: Option<f64>,
    pub relax: Option<bool>,
    pub fmax: Option<f64>,
    pub potential: Option<PotentialSpec>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VibronicSection {
    pub isolated: Option<PathBuf>,
    pub embedded: Option<PathBuf>,
    pub emitter_atoms: Option<String>,
    pub forces: Option<PathBuf>,
    pub ground: Option<PathBuf>,
    pub excited: Option<PathBuf>,
    pub frequency_floor_cm1: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinSection {
    pub states: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StarkSection {
    pub input: Option<PathBuf>,
    pub fields_kv_per_cm: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelSection {
    pub records: Option<PathBuf>,
    pub lambda_host_nm: Option<f64>,
    pub include_soc: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    pub grid: Option<usize>,
    pub optimize: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub records: Option<PathBuf>,
    /// Vibronic report JSON per candidate id.
    pub vibronic: BTreeMap<String, PathBuf>,
}

fn fix_potential(spec: &mut Option<PotentialSpec>, base: &Path) {
    if let Some(PotentialSpec::External { path }) = spec {
        *path = base.join(&*path);
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::validation("config", format!("{}: {e}", path.display())))?;
        let mut cfg: PipelineConfig = toml::from_str(&text).stage("config")?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = cfg.base.clone();
        fix_potential(&mut cfg.embed.potential, &base);
        fix_potential(&mut cfg.modes.potential, &base);
        Ok(cfg)
    }

    /// A path from the file, made relative to the file's directory.
    pub fn at(&self, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_ref().map(|p| self.base.join(p))
    }

    pub fn at_all<'a>(&'a self, ps: impl IntoIterator<Item = &'a PathBuf>) -> Vec<PathBuf> {
        ps.into_iter().map(|p| self.base.join(p)).collect()
    }
}
