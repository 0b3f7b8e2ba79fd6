//! Exact similarity oracles, the fingerprint collision estimator, and
//! the estimator-quality (MSE/bias) harness.

use crate::sketch::{sketch, Algorithm, Fingerprint, SketchError, SparseWeightedSet};
use crate::stats::KahanSum;
use crate::variates::{mix64, VariateScheme, GOLDEN_GAMMA};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("similarity of two empty sets is undefined")]
    UndefinedForEmptySets,
    #[error("fingerprints use different algorithms ({a} vs {b}) or parameters")]
    AlgorithmMismatch { a: &'static str, b: &'static str },
    #[error("fingerprints come from different master seeds ({a} vs {b})")]
    SeedMismatch { a: u64, b: u64 },
    #[error("fingerprints have different lengths ({a} vs {b})")]
    LengthMismatch { a: u32, b: u32 },
}

/// Exact generalized Jaccard similarity: `Σ min / Σ max` over the union
/// of supports. Both sets empty has no defined value; one empty set gives
/// 0 as a limit.
pub fn generalized_jaccard(
    s: &SparseWeightedSet,
    t: &SparseWeightedSet,
) -> Result<f64, SimilarityError> {
    if s.is_empty() && t.is_empty() {
        return Err(SimilarityError::UndefinedForEmptySets);
    }
    let (mut i, mut j) = (0, 0);
    let (se, te) = (s.entries(), t.entries());
    let mut min_sum = KahanSum::new();
    let mut max_sum = KahanSum::new();
    while i < se.len() || j < te.len() {
        match (se.get(i), te.get(j)) {
            (Some(&(ks, ws)), Some(&(kt, wt))) if ks == kt => {
                min_sum.add(ws.min(wt));
                max_sum.add(ws.max(wt));
                i += 1;
                j += 1;
            }
            (Some(&(ks, ws)), Some(&(kt, _))) if ks < kt => {
                max_sum.add(ws);
                i += 1;
            }
            (Some(_), Some(&(_, wt))) => {
                max_sum.add(wt);
                j += 1;
            }
            (Some(&(_, ws)), None) => {
                max_sum.add(ws);
                i += 1;
            }
            (None, Some(&(_, wt))) => {
                max_sum.add(wt);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(min_sum.value() / max_sum.value())
}

/// Set Jaccard on the supports, ignoring weights.
pub fn binary_jaccard(s: &SparseWeightedSet, t: &SparseWeightedSet) -> Result<f64, SimilarityError> {
    if s.is_empty() && t.is_empty() {
        return Err(SimilarityError::UndefinedForEmptySets);
    }
    let sa: std::collections::HashSet<u64> = s.entries().iter().map(|&(k, _)| k).collect();
    let ta: std::collections::HashSet<u64> = t.entries().iter().map(|&(k, _)| k).collect();
    let inter = sa.intersection(&ta).count();
    let union = sa.len() + ta.len() - inter;
    Ok(inter as f64 / union as f64)
}

fn require_comparable(a: &Fingerprint, b: &Fingerprint) -> Result<(), SimilarityError> {
    if a.algorithm() != b.algorithm() {
        return Err(SimilarityError::AlgorithmMismatch {
            a: a.algorithm().name(),
            b: b.algorithm().name(),
        });
    }
    if a.seed() != b.seed() {
        return Err(SimilarityError::SeedMismatch {
            a: a.seed(),
            b: b.seed(),
        });
    }
    if a.d() != b.d() {
        return Err(SimilarityError::LengthMismatch { a: a.d(), b: b.d() });
    }
    Ok(())
}

/// Fraction of positions at which the two fingerprints collide.
pub fn estimate_similarity(a: &Fingerprint, b: &Fingerprint) -> Result<f64, SimilarityError> {
    require_comparable(a, b)?;
    Ok(collision_fraction_prefix(a, b, a.d()))
}

/// Collision fraction over the first `d` positions. Because variates are
/// keyed by sample index, the first `d` codes of a longer fingerprint are
/// exactly the fingerprint that a length-`d` scheme would have produced,
/// so one pass at the largest D serves every smaller D too.
pub(crate) fn collision_fraction_prefix(a: &Fingerprint, b: &Fingerprint, d: u32) -> f64 {
    let d = d as usize;
    let hits = a.codes()[..d]
        .iter()
        .zip(&b.codes()[..d])
        .filter(|(x, y)| x.collides(y))
        .count();
    hits as f64 / d as f64
}

/// One row of the estimator-quality study: an algorithm at one
/// fingerprint length.
#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub algorithm: Algorithm,
    pub d: u32,
    pub pairs: usize,
    pub trials: usize,
    pub mse: f64,
    pub bias: f64,
}

/// Mean squared error and mean signed error of `estimates` against their
/// exact values, reduced with compensated sums so grouping cannot change
/// the reported numbers.
pub(crate) fn accumulate_error(cells: &[(f64, f64)]) -> (f64, f64) {
    let mut sq = KahanSum::new();
    let mut signed = KahanSum::new();
    for &(exact, estimate) in cells {
        let e = estimate - exact;
        sq.add(e * e);
        signed.add(e);
    }
    let n = cells.len() as f64;
    (sq.value() / n, signed.value() / n)
}

/// Derive the variate master seed of one trial from the study seed.
pub fn trial_seed(study_seed: u64, trial: usize) -> u64 {
    mix64(study_seed.wrapping_add((trial as u64 + 1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Sample `pair_count` distinct document pairs reproducibly.
pub fn sample_pairs(doc_count: usize, pair_count: usize, seed: u64) -> Vec<(usize, usize)> {
    assert!(doc_count >= 2, "need at least two documents to form pairs");
    let mut all: Vec<(usize, usize)> = (0..doc_count)
        .flat_map(|i| ((i + 1)..doc_count).map(move |j| (i, j)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    all.shuffle(&mut rng);
    all.truncate(pair_count);
    all
}

/// Study of estimator error for one algorithm across fingerprint lengths.
///
/// For every trial a fresh master seed is derived and each document
/// involved in a sampled pair is fingerprinted once at `max(d_list)`;
/// smaller lengths are read off as prefixes. Returns one row per entry of
/// `d_list`, in the given order.
pub fn mse_experiment(
    docs: &[SparseWeightedSet],
    algorithm: Algorithm,
    d_list: &[u32],
    pair_count: usize,
    trial_count: usize,
    study_seed: u64,
) -> Result<Vec<MseRow>, MseError> {
    let &d_max = d_list.iter().max().ok_or(MseError::NoLengths)?;
    if d_list.contains(&0) {
        return Err(MseError::NoLengths);
    }
    let pairs = sample_pairs(docs.len(), pair_count, study_seed);
    if pairs.len() < pair_count {
        return Err(MseError::NotEnoughPairs {
            requested: pair_count,
            available: pairs.len(),
        });
    }

    let mut involved: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    involved.sort_unstable();
    involved.dedup();

    let exact: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| generalized_jaccard(&docs[i], &docs[j]))
        .collect::<Result<_, _>>()?;

    // cells[d][pair·trial] = (exact, estimate), filled trial-major so the
    // reduction order is fixed.
    let mut cells: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(pairs.len() * trial_count); d_list.len()];
    for trial in 0..trial_count {
        let scheme = VariateScheme::new(trial_seed(study_seed, trial), d_max)
            .expect("d_max >= 1 was checked above");
        let mut fps: std::collections::HashMap<usize, Fingerprint> =
            std::collections::HashMap::new();
        for &doc in &involved {
            fps.insert(doc, sketch(&docs[doc], &scheme, algorithm)?);
        }
        for (pair_ix, &(i, j)) in pairs.iter().enumerate() {
            let (fa, fb) = (&fps[&i], &fps[&j]);
            for (dx, &d) in d_list.iter().enumerate() {
                cells[dx].push((exact[pair_ix], collision_fraction_prefix(fa, fb, d)));
            }
        }
    }

    Ok(d_list
        .iter()
        .zip(cells)
        .map(|(&d, cell)| {
            let (mse, bias) = accumulate_error(&cell);
            MseRow {
                algorithm,
                d,
                pairs: pairs.len(),
                trials: trial_count,
                mse,
                bias,
            }
        })
        .collect())
}

#[derive(Debug, Error)]
pub enum MseError {
    #[error("the study needs at least one positive fingerprint length")]
    NoLengths,
    #[error("requested {requested} pairs but the corpus only yields {available}")]
    NotEnoughPairs { requested: usize, available: usize },
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}
