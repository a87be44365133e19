use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fingerprint::Fingerprint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("fingerprint lengths differ ({0} vs {1} bits)")]
    LengthMismatch(usize, usize),
    #[error("empty database")]
    EmptyDatabase,
    #[error("descriptor dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("descriptor has zero norm")]
    ZeroNorm,
    #[error("descriptor has a non-finite entry")]
    NonFinite,
}

/// Tanimoto index `c / (a + b - c)`. Two empty fingerprints score 1.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, SimilarityError> {
    if a.nbits() != b.nbits() {
        return Err(SimilarityError::LengthMismatch(a.nbits(), b.nbits()));
    }
    let (na, nb, c) = (a.popcount(), b.popcount(), a.intersection_count(b));
    let union = na + nb - c;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(f64::from(c) / f64::from(union))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub id: String,
    pub similarity: f64,
}

/// Threshold statistics over a ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySummary {
    pub count: usize,
    /// Entries with similarity exactly 1.
    pub identical: usize,
    /// Fraction of all entries with similarity <= 0.4.
    pub fraction_at_most_0_4: f64,
    /// Entries with 0.5 <= similarity < 1.
    pub count_at_least_0_5: usize,
    pub fraction_at_least_0_5: f64,
    /// Entries with 0.85 < similarity < 1.
    pub count_above_0_85: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub entries: Vec<RankedEntry>,
    pub summary: SimilaritySummary,
}

/// Ranks `database` by descending similarity to `reference`; ties are
/// ordered by id.
pub fn rank_by_similarity(
    reference: &Fingerprint,
    database: &[(String, Fingerprint)],
) -> Result<Ranking, SimilarityError> {
    if database.is_empty() {
        return Err(SimilarityError::EmptyDatabase);
    }
    let mut entries = database
        .par_iter()
        .map(|(id, fp)| {
            tanimoto(reference, fp).map(|similarity| RankedEntry {
                id: id.clone(),
                similarity,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    entries.sort_by(|x, y| {
        y.similarity
            .total_cmp(&x.similarity)
            .then_with(|| x.id.cmp(&y.id))
    });
    let summary = summarize(&entries);
    Ok(Ranking { entries, summary })
}

fn summarize(entries: &[RankedEntry]) -> SimilaritySummary {
    let n = entries.len();
    let sims: Vec<f64> = entries.iter().map(|e| e.similarity).collect();
    let identical = sims.iter().filter(|&&s| s == 1.0).count();
    let le04 = sims.iter().filter(|&&s| s <= 0.4).count();
    let ge05 = sims.iter().filter(|&&s| (0.5..1.0).contains(&s)).count();
    let gt085 = sims.iter().filter(|&&s| s > 0.85 && s < 1.0).count();
    // entries are sorted descending
    let median = if n % 2 == 1 {
        sims[n / 2]
    } else {
        0.5 * (sims[n / 2 - 1] + sims[n / 2])
    };
    SimilaritySummary {
        count: n,
        identical,
        fraction_at_most_0_4: le04 as f64 / n as f64,
        count_at_least_0_5: ge05,
        fraction_at_least_0_5: ge05 as f64 / n as f64,
        count_above_0_85: gt085,
        mean: sims.iter().sum::<f64>() / n as f64,
        median,
    }
}

/// Histogram of similarities in `bins` equal-width bins over [0, 1], with
/// the log10 of each non-empty count. Returns (lower edge, count, log10).
pub fn log_histogram(similarities: &[f64], bins: usize) -> Vec<(f64, usize, Option<f64>)> {
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    for &s in similarities {
        let b = ((s.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let log = (c > 0).then(|| (c as f64).log10());
            (i as f64 / bins as f64, c, log)
        })
        .collect()
}

/// Fixed-length real descriptor (for example an averaged structural
/// descriptor computed elsewhere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub values: Vec<f64>,
}

impl DescriptorVector {
    pub fn new(values: Vec<f64>) -> Result<Self, SimilarityError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SimilarityError::NonFinite);
        }
        Ok(DescriptorVector { values })
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Normalized linear kernel `a·b / (|a||b|)`.
pub fn linear_kernel_similarity(
    a: &DescriptorVector,
    b: &DescriptorVector,
) -> Result<f64, SimilarityError> {
    if a.values.len() != b.values.len() {
        return Err(SimilarityError::DimensionMismatch(a.values.len(), b.values.len()));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(SimilarityError::ZeroNorm);
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}
