use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{gssoc_metric, rsoc_metric, soc_metric, ExcitedStateTable, SpectroError};

/// One candidate row of the screening summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub id: String,
    pub tanimoto: f64,
    pub fosc_abs: f64,
    pub fosc_em: f64,
    pub lambda_abs_nm: f64,
    pub lambda_em_nm: f64,
    /// 10⁻⁴⁰ cgs
    pub rotary: f64,
    pub soc: f64,
    pub rsoc: f64,
    pub gs_soc: f64,
    pub svc: f64,
    #[serde(rename = "e_bind_eV")]
    pub e_bind_ev: f64,
}

pub const CSV_HEADER: [&str; 12] = [
    "id", "tanimoto", "fosc_abs", "fosc_em", "lambda_abs_nm", "lambda_em_nm", "rotary", "soc", "rsoc", "gs_soc", "svc",
    "e_bind_eV",
];

impl CandidateRecord {
    pub fn values(&self) -> [f64; 11] {
        [
            self.tanimoto,
            self.fosc_abs,
            self.fosc_em,
            self.lambda_abs_nm,
            self.lambda_em_nm,
            self.rotary,
            self.soc,
            self.rsoc,
            self.gs_soc,
            self.svc,
            self.e_bind_ev,
        ]
    }
}

/// Everything a record is built from; `None` marks a missing input.
#[derive(Debug, Clone, Default)]
pub struct CandidateInputs<'a> {
    pub id: String,
    pub tanimoto: Option<f64>,
    pub table: Option<&'a ExcitedStateTable>,
    pub svc: Option<f64>,
    pub e_bind: Option<f64>,
}

/// Builds a record, reporting every missing input by name at once.
pub fn assemble_candidate(inputs: &CandidateInputs<'_>) -> Result<CandidateRecord, SpectroError> {
    let mut missing = Vec::new();
    let mut need = |name: &str, v: Option<f64>| -> f64 {
        match v {
            Some(x) if x.is_finite() => x,
            _ => {
                missing.push(name.to_string());
                f64::NAN
            }
        }
    };
    let tanimoto = need("tanimoto", inputs.tanimoto);
    let svc = need("S_VC", inputs.svc);
    let e_bind = need("E_bind", inputs.e_bind);
    let (s1, em, gs) = match inputs.table {
        Some(t) => (t.s1().ok().cloned(), t.emission.clone(), t.gs_soc_t1_cm1),
        None => (None, None, None),
    };
    let fosc_abs = need("f_osc_abs", s1.as_ref().map(|s| s.fosc));
    let lambda_abs = need("lambda_abs", s1.as_ref().map(|s| s.lambda_nm));
    let rotary = need("R", s1.as_ref().map(|s| s.rotary));
    let fosc_em = need("f_osc_em", em.as_ref().map(|e| e.fosc));
    let lambda_em = need("lambda_em", em.as_ref().map(|e| e.lambda_nm));
    need("gsSOC", gs);
    if !missing.is_empty() {
        return Err(SpectroError::MissingFields(missing));
    }
    let table = inputs.table.expect("checked above");
    Ok(CandidateRecord {
        id: inputs.id.clone(),
        tanimoto,
        fosc_abs,
        fosc_em,
        lambda_abs_nm: lambda_abs,
        lambda_em_nm: lambda_em,
        rotary,
        soc: soc_metric(table)?,
        rsoc: rsoc_metric(table)?,
        gs_soc: gssoc_metric(table)?,
        svc,
        e_bind_ev: e_bind,
    })
}

pub fn write_records_csv<W: Write>(records: &[CandidateRecord], out: W) -> Result<(), SpectroError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| SpectroError::Io(e.to_string()))?;
    Ok(())
}

pub fn records_to_csv(records: &[CandidateRecord]) -> Result<String, SpectroError> {
    let mut buf = Vec::new();
    write_records_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Reads records, naming every missing column at once.
pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<CandidateRecord>, SpectroError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let missing: Vec<String> =
        CSV_HEADER.iter().filter(|h| !headers.iter().any(|x| x.trim() == **h)).map(|h| h.to_string()).collect();
    if !missing.is_empty() {
        return Err(SpectroError::MissingFields(missing));
    }
    let records: Vec<CandidateRecord> = r.deserialize().collect::<Result<_, _>>()?;
    if let Some(bad) = records.iter().find(|r| r.values().iter().any(|v| !v.is_finite())) {
        return Err(SpectroError::Invalid(format!("non-finite value in record {}", bad.id)));
    }
    Ok(records)
}
