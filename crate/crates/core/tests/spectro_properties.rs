use proptest::prelude::*;
use spescreen_core::spectro::{
    gssoc_metric, read_records_csv, records_to_csv, rsoc_metric, soc_metric, stark_coefficients, CandidateRecord,
    ExcitedStateTable, SingletState, StarkInput, TripletState,
};

fn table(s1: f64, triplets: &[(f64, f64)]) -> ExcitedStateTable {
    ExcitedStateTable {
        singlets: vec![
            SingletState { energy_ev: s1 + 0.7, fosc: 0.1, rotary: 0.0, lambda_nm: 1239.84 / (s1 + 0.7) },
            SingletState { energy_ev: s1, fosc: 0.9, rotary: 1.5, lambda_nm: 1239.84 / s1 },
        ],
        triplets: triplets.iter().map(|&(e, c)| TripletState { energy_ev: e, soc_s1_cm1: c }).collect(),
        gs_soc_t1_cm1: Some(0.2),
        emission: None,
    }
    .new()
    .unwrap()
}

fn triplets() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((0.5f64..4.0, 0.0f64..5.0), 0..12)
}

fn record() -> impl Strategy<Value = CandidateRecord> {
    ("[A-Za-z0-9_-]{1,12}", proptest::array::uniform11(-1e6f64..1e6)).prop_map(|(id, v)| CandidateRecord {
        id,
        tanimoto: v[0],
        fosc_abs: v[1],
        fosc_em: v[2],
        lambda_abs_nm: v[3],
        lambda_em_nm: v[4],
        rotary: v[5],
        soc: v[6],
        rsoc: v[7],
        gs_soc: v[8],
        svc: v[9],
        e_bind_ev: v[10],
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn below_and_above_partition_the_couplings(s1 in 1.0f64..3.5, t in triplets()) {
        let tb = table(s1, &t);
        let total: f64 = t.iter().map(|(_, c)| c * c).sum();
        let (soc, rsoc) = (soc_metric(&tb).unwrap(), rsoc_metric(&tb).unwrap());
        prop_assert!((soc * soc + rsoc * rsoc - total).abs() <= 1e-12 * total.max(1.0));
        prop_assert_eq!(gssoc_metric(&tb).unwrap(), 0.2);
    }

    #[test]
    fn soc_grows_with_s1_and_couplings(s1 in 1.0f64..3.0, up in 0.0f64..1.0, t in triplets(), which in any::<prop::sample::Index>(), extra in 0.0f64..3.0) {
        let low = soc_metric(&table(s1, &t)).unwrap();
        prop_assert!(soc_metric(&table(s1 + up, &t)).unwrap() >= low);
        prop_assert!(rsoc_metric(&table(s1 + up, &t)).unwrap() <= rsoc_metric(&table(s1, &t)).unwrap());
        if !t.is_empty() {
            let mut more = t.clone();
            more[which.index(t.len())].1 += extra;
            prop_assert!(soc_metric(&table(s1, &more)).unwrap() >= low);
            prop_assert!(rsoc_metric(&table(s1, &more)).unwrap() >= rsoc_metric(&table(s1, &t)).unwrap());
        }
    }

    #[test]
    fn metrics_ignore_input_order(s1 in 1.0f64..3.5, t in triplets()) {
        let mut rev = t.clone();
        rev.reverse();
        prop_assert_eq!(table(s1, &t), table(s1, &rev));
        prop_assert!((soc_metric(&table(s1, &t)).unwrap() - soc_metric(&table(s1, &rev)).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn stark_shift_is_even_and_quadratic(mu in -5.0f64..5.0, alpha in -500.0f64..500.0, e in -50.0f64..50.0) {
        let c = stark_coefficients(&StarkInput { dipole_au: mu, polarizability_au: alpha });
        prop_assert!(c.a >= 0.0);
        prop_assert_eq!(c.shift_mhz(e), c.shift_mhz(-e));
        let second = c.shift_mhz(2.0 * e) - 2.0 * c.shift_mhz(e);
        prop_assert!((second - 2.0 * c.b * e * e).abs() <= 1e-9 * (c.a.abs() + c.b.abs() + 1.0) * (1.0 + e * e));
        // published conversion factors
        prop_assert!((c.a - mu.abs() * 1279.57).abs() <= 1e-4 * mu.abs() * 1279.57 + 1e-12);
        prop_assert!((c.b + 0.5 * alpha * 2.4884e-4).abs() <= 1e-4 * (0.5 * alpha * 2.4884e-4).abs() + 1e-15);
    }

    #[test]
    fn records_survive_csv(rs in proptest::collection::vec(record(), 1..20)) {
        let text = records_to_csv(&rs).unwrap();
        prop_assert_eq!(read_records_csv(text.as_bytes()).unwrap(), rs);
    }
}
