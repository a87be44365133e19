use super::MlError;
use crate::spectro::CandidateRecord;

fn mean(records: &[CandidateRecord], f: impl Fn(&CandidateRecord) -> f64) -> f64 {
    records.iter().map(f).sum::<f64>() / records.len() as f64
}

/// Good means better than the set average on emission strength, vibronic
/// coupling and optionally SOC, and absorbing to the red of the host.
/// All comparisons are strict.
pub fn label_good(records: &[CandidateRecord], lambda_host_abs_nm: f64, include_soc: bool) -> Result<Vec<bool>, MlError> {
    if records.is_empty() {
        return Err(MlError::Empty);
    }
    if !lambda_host_abs_nm.is_finite() {
        return Err(MlError::InvalidParameter("host absorption wavelength must be finite".into()));
    }
    let fosc = mean(records, |r| r.fosc_em);
    let svc = mean(records, |r| r.svc);
    let soc = mean(records, |r| r.soc);
    Ok(records
        .iter()
        .map(|r| {
            r.fosc_em > fosc && r.lambda_abs_nm > lambda_host_abs_nm && r.svc < svc && (!include_soc || r.soc < soc)
        })
        .collect())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn record(id: &str, fosc_em: f64, lambda_abs: f64, svc: f64, soc: f64) -> CandidateRecord {
        CandidateRecord {
            id: id.into(),
            tanimoto: 0.5,
            fosc_abs: fosc_em,
            fosc_em,
            lambda_abs_nm: lambda_abs,
            lambda_em_nm: lambda_abs + 30.0,
            rotary: 0.0,
            soc,
            rsoc: 1.0,
            gs_soc: 0.5,
            svc,
            e_bind_ev: -0.3,
        }
    }

    #[test]
    fn single_record_is_bad() {
        assert_eq!(label_good(&[record("a", 1.0, 700.0, 0.01, 0.1)], 400.0, true).unwrap(), vec![false]);
        assert!(label_good(&[], 400.0, true).is_err());
    }

    #[test]
    fn dominant_record_is_good_and_soc_is_restrictive() {
        let rs = vec![
            record("best", 1.5, 700.0, 0.004, 0.05),
            record("mid", 0.8, 650.0, 0.01, 0.2),
            record("poor", 0.1, 380.0, 0.05, 2.0),
            record("soc-heavy", 1.2, 690.0, 0.005, 3.0),
        ];
        let with = label_good(&rs, 400.0, true).unwrap();
        let without = label_good(&rs, 400.0, false).unwrap();
        assert_eq!(with, vec![true, false, false, false]);
        assert_eq!(without, vec![true, false, false, true]);
        assert!(with.iter().zip(&without).all(|(&a, &b)| !a || b));
    }
}
