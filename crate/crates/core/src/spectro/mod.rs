//! Excited-state tables, spin-orbit aggregates, Stark coefficients and
//! per-candidate summary records.

mod record;
mod stark;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use record::{assemble_candidate, read_records_csv, records_to_csv, write_records_csv, CandidateInputs, CandidateRecord, CSV_HEADER};
pub use stark::{stark_coefficients, StarkCoefficients, StarkInput};

#[derive(Debug, Error)]
pub enum SpectroError {
    #[error("excited-state table has no singlet states")]
    MissingS1,
    #[error("missing fields: {}", .0.join(", "))]
    MissingFields(Vec<String>),
    #[error("invalid excited-state data: {0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingletState {
    #[serde(rename = "energy_eV")]
    pub energy_ev: f64,
    pub fosc: f64,
    /// Rotary strength in 10⁻⁴⁰ cgs.
    #[serde(rename = "rotary_1e40cgs", default)]
    pub rotary: f64,
    pub lambda_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletState {
    #[serde(rename = "energy_eV")]
    pub energy_ev: f64,
    /// |⟨T_i|H_SO|S_1⟩|, stored as given.
    pub soc_s1_cm1: f64,
}

/// S₁ emission data taken at the relaxed excited-state geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionData {
    pub fosc: f64,
    pub lambda_nm: f64,
}

/// Singlets and triplets sorted by ascending energy; the first singlet is S₁.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitedStateTable {
    pub singlets: Vec<SingletState>,
    #[serde(default)]
    pub triplets: Vec<TripletState>,
    /// |⟨T_1|H_SO|S_0⟩|.
    #[serde(default)]
    pub gs_soc_t1_cm1: Option<f64>,
    #[serde(default)]
    pub emission: Option<EmissionData>,
}

fn nonneg(x: f64) -> bool {
    x >= 0.0 && x.is_finite()
}

impl ExcitedStateTable {
    /// Validates and sorts the states.
    pub fn new(mut self) -> Result<Self, SpectroError> {
        let bad = |m: String| Err(SpectroError::Invalid(m));
        for s in &self.singlets {
            if !(s.energy_ev > 0.0 && s.energy_ev.is_finite()) || !nonneg(s.fosc) || !(s.lambda_nm > 0.0) || !s.rotary.is_finite() {
                return bad(format!("singlet {s:?}"));
            }
        }
        for t in &self.triplets {
            if !(t.energy_ev > 0.0 && t.energy_ev.is_finite()) || !nonneg(t.soc_s1_cm1) {
                return bad(format!("triplet {t:?}"));
            }
        }
        if let Some(g) = self.gs_soc_t1_cm1 {
            if !nonneg(g) {
                return bad(format!("ground-state SOC {g}"));
            }
        }
        if let Some(e) = &self.emission {
            if !nonneg(e.fosc) || !(e.lambda_nm > 0.0) {
                return bad(format!("emission {e:?}"));
            }
        }
        self.singlets.sort_by(|a, b| a.energy_ev.total_cmp(&b.energy_ev));
        self.triplets.sort_by(|a, b| a.energy_ev.total_cmp(&b.energy_ev));
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self, SpectroError> {
        let t: ExcitedStateTable = serde_json::from_str(text).map_err(|e| SpectroError::Invalid(e.to_string()))?;
        t.new()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, SpectroError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| SpectroError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn s1(&self) -> Result<&SingletState, SpectroError> {
        self.singlets.first().ok_or(SpectroError::MissingS1)
    }
}

fn quadrature_sum(table: &ExcitedStateTable, below: bool) -> Result<f64, SpectroError> {
    let e1 = table.s1()?.energy_ev;
    let sum: f64 = table
        .triplets
        .iter()
        // a triplet exactly at S₁ counts as below
        .filter(|t| (t.energy_ev <= e1) == below)
        .map(|t| t.soc_s1_cm1 * t.soc_s1_cm1)
        .sum();
    Ok(sum.sqrt())
}

/// Quadrature sum of S₁ couplings to triplets at or below S₁.
pub fn soc_metric(table: &ExcitedStateTable) -> Result<f64, SpectroError> {
    quadrature_sum(table, true)
}

/// Quadrature sum of S₁ couplings to triplets above S₁.
pub fn rsoc_metric(table: &ExcitedStateTable) -> Result<f64, SpectroError> {
    quadrature_sum(table, false)
}

/// |⟨T_1|H_SO|S_0⟩|.
pub fn gssoc_metric(table: &ExcitedStateTable) -> Result<f64, SpectroError> {
    match table.gs_soc_t1_cm1 {
        Some(g) if nonneg(g) => Ok(g),
        Some(g) => Err(SpectroError::Invalid(format!("ground-state SOC {g}"))),
        None => Err(SpectroError::MissingFields(vec!["gs_soc_t1_cm1".into()])),
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::table;
    use super::*;

    #[test]
    fn case_split_fixtures() {
        let t = table(1.2, &[(1.0, 0.3), (1.5, 0.4)]);
        assert_eq!(soc_metric(&t).unwrap(), 0.3);
        assert_eq!(rsoc_metric(&t).unwrap(), 0.4);
        let t = table(2.0, &[(1.0, 3.0), (1.5, 4.0)]);
        assert_eq!(soc_metric(&t).unwrap(), 5.0);
        assert_eq!(rsoc_metric(&t).unwrap(), 0.0);
        let t = table(0.5, &[(1.0, 3.0)]);
        assert_eq!(soc_metric(&t).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_triplet_goes_to_soc() {
        let t = table(1.2, &[(1.2, 0.7)]);
        assert_eq!(soc_metric(&t).unwrap(), 0.7);
        assert_eq!(rsoc_metric(&t).unwrap(), 0.0);
    }

    #[test]
    fn ground_state_and_validation() {
        let mut t = table(1.2, &[]);
        assert_eq!(gssoc_metric(&t).unwrap(), 0.05);
        t.gs_soc_t1_cm1 = Some(0.0);
        assert_eq!(gssoc_metric(&t).unwrap(), 0.0);
        t.gs_soc_t1_cm1 = Some(-0.1);
        assert!(gssoc_metric(&t).is_err());
        assert!(t.clone().new().is_err());
        t.gs_soc_t1_cm1 = None;
        assert!(matches!(gssoc_metric(&t), Err(SpectroError::MissingFields(_))));
        let empty = ExcitedStateTable { singlets: vec![], triplets: vec![], gs_soc_t1_cm1: None, emission: None };
        assert!(matches!(soc_metric(&empty), Err(SpectroError::MissingS1)));
    }

    #[test]
    fn json_layout_and_sorting() {
        let text = r#"{"singlets": [{"energy_eV": 2.5, "fosc": 0.1, "rotary_1e40cgs": 1.0, "lambda_nm": 495.9},
                                   {"energy_eV": 1.8, "fosc": 0.7, "rotary_1e40cgs": -0.2, "lambda_nm": 688.8}],
                      "triplets": [{"energy_eV": 2.0, "soc_s1_cm1": 0.4}, {"energy_eV": 1.0, "soc_s1_cm1": 0.1}],
                      "gs_soc_t1_cm1": 0.3}"#;
        let t = ExcitedStateTable::from_json(text).unwrap();
        assert_eq!(t.s1().unwrap().energy_ev, 1.8);
        assert_eq!(t.triplets[0].energy_ev, 1.0);
        assert_eq!(soc_metric(&t).unwrap(), 0.1);
        assert!(ExcitedStateTable::from_json(r#"{"singlets": [{"energy_eV": -1, "fosc": 0, "lambda_nm": 1}]}"#).is_err());
    }
}
