pub mod classify;
pub mod embed;
pub mod map;
pub mod modes;
pub mod report;
pub mod similarity;
pub mod spin;
pub mod stark;
pub mod vibronic;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use spescreen_core::potential::{LjParams, PotentialSpec};
use spescreen_core::Element;

use crate::config::PipelineConfig;
use crate::error::CliError;

pub struct Ctx {
    pub cfg: PipelineConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Ctx {
    /// Flag value, else the config value resolved against the config file,
    /// else an error naming the flag.
    pub fn path(&self, stage: &'static str, flag: &Option<PathBuf>, cfg: &Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
        flag.clone()
            .or_else(|| self.cfg.at(cfg))
            .ok_or_else(|| CliError::validation(stage, format!("--{name} is required (or set it in the config)")))
    }

    pub fn opt_path(&self, flag: &Option<PathBuf>, cfg: &Option<PathBuf>) -> Option<PathBuf> {
        flag.clone().or_else(|| self.cfg.at(cfg))
    }

    /// Output directory and file name for a stage's primary file. A given
    /// `--out` is taken relative to the output directory.
    pub fn primary(&self, out: &Option<PathBuf>, default: &str) -> (PathBuf, String) {
        let full = self.out_dir.join(out.clone().unwrap_or_else(|| PathBuf::from(default)));
        let dir = full.parent().map(Path::to_path_buf).unwrap_or_else(|| self.out_dir.clone());
        let name = full.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| default.to_string());
        (dir, name)
    }
}

/// Desk-scale stand-in for a real force field: springs on covalent bonds and
/// 1-3 pairs, with UFF Lennard-Jones parameters between molecules.
pub fn default_potential() -> PotentialSpec {
    let lj = |epsilon, sigma| LjParams { epsilon, sigma };
    let elements: BTreeMap<Element, LjParams> = [
        (Element::H, lj(0.001908, 2.5711)),
        (Element::C, lj(0.004553, 3.4309)),
        (Element::N, lj(0.002992, 3.2607)),
        (Element::O, lj(0.002602, 3.1181)),
        (Element::S, lj(0.011882, 3.5948)),
    ]
    .into_iter()
    .collect();
    PotentialSpec::HarmonicToy { bond_k: 30.0, angle_k: 5.0, elements, pairs: BTreeMap::new(), repulsive_only: false }
}

/// Parses atom lists such as `0-11,15`.
pub fn parse_atom_list(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("bad atom index `{s}`"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if b < a {
                    return Err(format!("descending range `{part}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err("empty atom list".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_lists() {
        assert_eq!(parse_atom_list("0-3, 7").unwrap(), vec![0, 1, 2, 3, 7]);
        assert!(parse_atom_list("3-1").is_err());
        assert!(parse_atom_list("a").is_err());
        assert!(parse_atom_list("").is_err());
    }

    #[test]
    fn default_potential_covers_organic_elements() {
        let s = spescreen_core::structure::builders::benzene();
        assert!(default_potential().build(&s).is_ok());
    }
}
