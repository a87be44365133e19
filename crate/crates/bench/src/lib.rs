//! Deterministic inputs for the benchmarks.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spescreen_core::potential::{LjParams, PotentialSpec};
use spescreen_core::spectro::CandidateRecord;
use spescreen_core::Element;

const CORES: [&str; 6] = ["c1ccccc1", "c1ccc2ccccc2c1", "c1ccncc1", "c1ccsc1", "C1CCCCC1", "c1ccc2cc3ccccc3cc2c1"];
const TAILS: [&str; 8] = ["", "O", "N", "C(=O)O", "CC", "OC", "C#N", "CS"];

/// `n` distinct (id, SMILES) pairs: an alkyl chain, a ring system and a tail.
pub fn smiles_library(n: usize) -> Vec<(String, String)> {
    (0..n)
        .map(|i| {
            let chain = "C".repeat(i / (CORES.len() * TAILS.len()) % 12);
            let smiles = format!("{chain}{}{}", CORES[i % CORES.len()], TAILS[i / CORES.len() % TAILS.len()]);
            (format!("m{i:05}"), smiles)
        })
        .collect()
}

/// `n` points in the plane drawn from `blobs` well separated square blobs.
pub fn clustered_points(n: usize, blobs: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<(f64, f64)> = (0..blobs).map(|b| (10.0 * (b % 4) as f64, 10.0 * (b / 4) as f64)).collect();
    DMatrix::from_fn(n, 2, |i, j| {
        let c = centers[i % blobs];
        let base = if j == 0 { c.0 } else { c.1 };
        base + rng.random_range(-1.0..1.0)
    })
}

/// Synthetic candidate records spread over the ranges seen in practice.
pub fn candidate_records(n: usize, seed: u64) -> Vec<CandidateRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let lambda_abs = rng.random_range(320.0..720.0);
            let fosc_abs: f64 = rng.random_range(0.0..1.5);
            CandidateRecord {
                id: format!("c{i}"),
                tanimoto: rng.random_range(0.5..1.0),
                fosc_abs,
                fosc_em: fosc_abs * rng.random_range(0.5..1.1),
                lambda_abs_nm: lambda_abs,
                lambda_em_nm: lambda_abs + rng.random_range(20.0..150.0),
                rotary: rng.random_range(-5.0..5.0),
                soc: rng.random_range(0.0..3.5),
                rsoc: rng.random_range(0.5..6.0),
                gs_soc: rng.random_range(0.0..2.0),
                svc: rng.random_range(0.004..0.08),
                e_bind_ev: rng.random_range(-0.7..0.3),
            }
        })
        .collect()
}

/// Bonded springs with UFF Lennard-Jones between molecules.
pub fn toy_potential() -> PotentialSpec {
    let lj = |epsilon, sigma| LjParams { epsilon, sigma };
    let elements: BTreeMap<Element, LjParams> =
        [(Element::H, lj(0.001908, 2.5711)), (Element::C, lj(0.004553, 3.4309)), (Element::N, lj(0.002992, 3.2607))].into_iter().collect();
    PotentialSpec::HarmonicToy { bond_k: 30.0, angle_k: 5.0, elements, pairs: BTreeMap::new(), repulsive_only: false }
}
