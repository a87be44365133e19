use std::collections::BTreeMap;

use nalgebra::DMatrix;
use proptest::prelude::*;
use spescreen_core::ml::{
    calibrate_affinities, density_cluster, label_good, pca, squared_euclidean_matrix, ClusterSelection, GpcModel,
    GpcOptions, NOISE,
};
use spescreen_core::spectro::CandidateRecord;

fn matrix(rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> impl Strategy<Value = DMatrix<f64>> {
    (rows, cols).prop_flat_map(|(n, p)| {
        proptest::collection::vec(-10.0f64..10.0, n * p).prop_map(move |v| DMatrix::from_row_slice(n, p, &v))
    })
}

fn record(i: usize, v: [f64; 4]) -> CandidateRecord {
    CandidateRecord {
        id: format!("c{i}"),
        tanimoto: 0.5,
        fosc_abs: 0.3,
        fosc_em: v[0],
        lambda_abs_nm: v[1],
        lambda_em_nm: v[1] + 20.0,
        rotary: 0.0,
        soc: v[2],
        rsoc: 0.1,
        gs_soc: 0.1,
        svc: v[3],
        e_bind_ev: -0.2,
    }
}

fn records() -> impl Strategy<Value = Vec<CandidateRecord>> {
    proptest::collection::vec((0.0f64..2.0, 350.0f64..800.0, 0.0f64..1.0, 0.0f64..0.05), 1..40)
        .prop_map(|rows| rows.into_iter().enumerate().map(|(i, (a, b, c, d))| record(i, [a, b, c, d])).collect())
}

/// Same partition regardless of label numbering, noise kept apart.
fn same_partition(a: &[i32], b: &[i32]) -> bool {
    let mut map = BTreeMap::new();
    a.iter().zip(b).all(|(&x, &y)| {
        if x == NOISE || y == NOISE {
            return x == y;
        }
        *map.entry(x).or_insert(y) == y
    }) && {
        let mut seen = BTreeMap::new();
        map.iter().all(|(k, v)| *seen.entry(*v).or_insert(*k) == *k)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pca_ratios_sum_to_one(x in matrix(3..30, 1..8)) {
        // a one-component fit tells how many columns survive standardization
        let Ok(full) = pca(&x, 1) else { return Ok(()) };
        let p = full.standardized.retained.len();
        let r = pca(&x, p).unwrap();
        prop_assert!((r.explained_ratio.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(r.explained_variance.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        // total variance of z-scored columns with n − 1 denominators
        let n = x.nrows() as f64;
        prop_assert!((r.explained_variance.iter().sum::<f64>() - p as f64 * n / (n - 1.0)).abs() < 1e-9 * p as f64);
        for c in r.scores.column_iter() {
            prop_assert!(c.mean().abs() < 1e-9);
        }
        let gram = r.components.transpose() * &r.components;
        prop_assert!((gram - DMatrix::identity(p, p)).amax() < 1e-10);
    }

    #[test]
    fn calibration_hits_the_target(x in matrix(8..40, 2..5), perplexity in 2.0f64..6.0) {
        let d = squared_euclidean_matrix(&x);
        if d.amax() == 0.0 {
            return Ok(());
        }
        let cal = calibrate_affinities(&d, perplexity).unwrap();
        prop_assert!(cal.max_perplexity_error(perplexity) < 1e-5 * perplexity);
        for row in cal.conditional.row_iter() {
            prop_assert!((row.sum() - 1.0).abs() < 1e-12);
        }
        for i in 0..x.nrows() {
            prop_assert_eq!(cal.conditional[(i, i)], 0.0);
        }
    }

    #[test]
    fn soc_criterion_only_removes_candidates(rs in records(), host in 300.0f64..700.0) {
        let with = label_good(&rs, host, true).unwrap();
        let without = label_good(&rs, host, false).unwrap();
        for (i, (&a, &b)) in with.iter().zip(&without).enumerate() {
            prop_assert!(!a || b);
            if b {
                prop_assert!(rs[i].lambda_abs_nm > host);
            }
        }
        // the best emitter by every measure cannot be below every mean
        prop_assert!(without.iter().filter(|&&g| g).count() < rs.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gpc_probabilities_are_open_and_complementary(
        x in matrix(4..16, 1..4),
        flips in proptest::collection::vec(any::<bool>(), 16),
        amp in 0.1f64..10.0,
        len in 0.3f64..5.0,
        queries in matrix(5..6, 3..4),
    ) {
        let y: Vec<bool> = flips[..x.nrows()].to_vec();
        if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
            return Ok(());
        }
        let opts = GpcOptions { initial_amplitude: amp, initial_length_scale: len, optimize: false, ..Default::default() };
        let m = GpcModel::fit(&x, &y, &opts).unwrap();
        let inv: Vec<bool> = y.iter().map(|v| !v).collect();
        let mi = GpcModel::fit(&x, &inv, &opts).unwrap();
        let q = queries.columns(0, x.ncols()).into_owned();
        for (p, pi) in m.predict_proba(&q).unwrap().iter().zip(mi.predict_proba(&q).unwrap()) {
            prop_assert!(*p > 0.0 && *p < 1.0);
            prop_assert!((p + pi - 1.0).abs() < 1e-9, "{} + {}", p, pi);
        }
        prop_assert!(m.posterior.gradient_norm < 1e-8);
    }

    #[test]
    fn clusters_follow_translation_and_order(
        centers in proptest::collection::vec(proptest::array::uniform2(-40i32..40), 1..4),
        jitter in proptest::collection::vec(proptest::array::uniform2(-16i32..16), 60),
        shift in proptest::array::uniform2(-1000i32..1000),
        mode in prop::sample::select(vec![ClusterSelection::Leaf, ClusterSelection::Eom]),
    ) {
        // coordinates are multiples of 1/8 so translated distances are exact
        let n = 60;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let c = centers[i % centers.len()];
                [c[0] as f64 + jitter[i][0] as f64 / 8.0, c[1] as f64 + jitter[i][1] as f64 / 8.0]
            })
            .collect();
        let x = DMatrix::from_fn(n, 2, |i, j| pts[i][j]);
        let base = density_cluster(&x, 5, None, mode).unwrap();
        let moved = DMatrix::from_fn(n, 2, |i, j| pts[i][j] + shift[j] as f64);
        prop_assert_eq!(&density_cluster(&moved, 5, None, mode).unwrap().labels, &base.labels);
        // grid data is full of tied distances
        let rev = DMatrix::from_fn(n, 2, |i, j| pts[n - 1 - i][j]);
        let mut back = density_cluster(&rev, 5, None, mode).unwrap().labels;
        back.reverse();
        prop_assert!(same_partition(&base.labels, &back), "{:?} vs {:?}", base.labels, back);
        for (i, &l) in base.labels.iter().enumerate() {
            prop_assert!(l >= NOISE && (l as i64) < base.n_clusters as i64, "point {} label {}", i, l);
        }
    }

    #[test]
    fn clusters_ignore_point_order(
        centers in proptest::collection::vec(proptest::array::uniform2(-40.0f64..40.0), 1..4),
        jitter in proptest::collection::vec(proptest::array::uniform2(-2.0f64..2.0), 60),
        mode in prop::sample::select(vec![ClusterSelection::Leaf, ClusterSelection::Eom]),
    ) {
        let n = 60;
        let x = DMatrix::from_fn(n, 2, |i, j| centers[i % centers.len()][j] + jitter[i][j]);
        let base = density_cluster(&x, 5, None, mode).unwrap();
        let rev = DMatrix::from_fn(n, 2, |i, j| x[(n - 1 - i, j)]);
        let mut back = density_cluster(&rev, 5, None, mode).unwrap().labels;
        back.reverse();
        prop_assert!(same_partition(&base.labels, &back), "{:?} vs {:?}", base.labels, back);
    }
}
