//! Top-K retrieval over fingerprints, scored against exact-similarity
//! ground truth with Precision@K and MAP@K.

use crate::similarity::{estimate_similarity, generalized_jaccard, SimilarityError};
use crate::sketch::{Fingerprint, SparseWeightedSet};

/// One query's ranking of the database.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    pub query_id: u64,
    /// Database doc ids ordered by estimated similarity descending, ties
    /// broken by ascending doc id.
    pub ranked_ids: Vec<u64>,
    /// Set when the database was smaller than the requested depth.
    pub truncated: bool,
}

/// Rank `db` against `query` and keep the top `k`.
pub fn topk(
    query_id: u64,
    query: &Fingerprint,
    db: &[(u64, Fingerprint)],
    k: usize,
) -> Result<RetrievalResult, SimilarityError> {
    let mut scored = Vec::with_capacity(db.len());
    for (doc_id, fp) in db {
        scored.push((estimate_similarity(query, fp)?, *doc_id));
    }
    Ok(rank_and_truncate(query_id, scored, k))
}

/// Exact-similarity ground truth over the same database.
pub fn exact_topk(
    query: &SparseWeightedSet,
    db: &[SparseWeightedSet],
    k: usize,
) -> Result<RetrievalResult, SimilarityError> {
    let mut scored = Vec::with_capacity(db.len());
    for doc in db {
        scored.push((generalized_jaccard(query, doc)?, doc.doc_id()));
    }
    Ok(rank_and_truncate(query.doc_id(), scored, k))
}

fn rank_and_truncate(query_id: u64, mut scored: Vec<(f64, u64)>, k: usize) -> RetrievalResult {
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("similarities are finite")
            .then(a.1.cmp(&b.1))
    });
    let truncated = k > scored.len();
    scored.truncate(k);
    RetrievalResult {
        query_id,
        ranked_ids: scored.into_iter().map(|(_, id)| id).collect(),
        truncated,
    }
}

/// Fraction of the first `k` retrieved ids that are relevant.
pub fn precision_at_k(result: &RetrievalResult, relevant: &[u64], k: usize) -> f64 {
    assert!(k >= 1, "precision needs a positive depth");
    let relevant: std::collections::HashSet<u64> = relevant.iter().copied().collect();
    let hits = result
        .ranked_ids
        .iter()
        .take(k)
        .filter(|id| relevant.contains(id))
        .count();
    hits as f64 / k as f64
}

/// Average precision truncated at `k`: precision is sampled at each rank
/// that lands a relevant item, and the sum is normalized by the best
/// achievable hit count `min(k, |relevant|)`.
pub fn average_precision_at_k(result: &RetrievalResult, relevant: &[u64], k: usize) -> f64 {
    assert!(k >= 1, "average precision needs a positive depth");
    if relevant.is_empty() {
        return 0.0;
    }
    let relevant_set: std::collections::HashSet<u64> = relevant.iter().copied().collect();
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank0, id) in result.ranked_ids.iter().take(k).enumerate() {
        if relevant_set.contains(id) {
            hits += 1;
            sum += hits as f64 / (rank0 + 1) as f64;
        }
    }
    sum / relevant_set.len().min(k) as f64
}

/// Mean of [`average_precision_at_k`] over paired (result, ground truth)
/// queries.
pub fn map_at_k(results: &[RetrievalResult], ground_truths: &[Vec<u64>], k: usize) -> f64 {
    assert_eq!(results.len(), ground_truths.len());
    assert!(!results.is_empty(), "MAP over zero queries is undefined");
    let total: f64 = results
        .iter()
        .zip(ground_truths)
        .map(|(r, truth)| average_precision_at_k(r, truth, k))
        .sum();
    total / results.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{sketch, Algorithm};
    use crate::variates::VariateScheme;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(doc: u64, entries: &[(u64, f64)]) -> SparseWeightedSet {
        SparseWeightedSet::new(doc, entries.to_vec()).unwrap()
    }

    fn result(ids: &[u64]) -> RetrievalResult {
        RetrievalResult {
            query_id: 0,
            ranked_ids: ids.to_vec(),
            truncated: false,
        }
    }

    #[test]
    fn identical_document_ranks_first() {
        let query = set(100, &[(1, 1.0), (2, 2.0), (3, 0.5)]);
        let db: Vec<SparseWeightedSet> = vec![
            set(0, &[(1, 1.0), (9, 2.0)]),
            set(1, &[(1, 1.0), (2, 2.0), (3, 0.5)]),
            set(2, &[(7, 1.0)]),
        ];
        let scheme = VariateScheme::new(5, 128).unwrap();
        let qfp = sketch(&query, &scheme, Algorithm::I2cws).unwrap();
        let db_fps: Vec<(u64, Fingerprint)> = db
            .iter()
            .map(|d| (d.doc_id(), sketch(d, &scheme, Algorithm::I2cws).unwrap()))
            .collect();
        let top = topk(100, &qfp, &db_fps, 3).unwrap();
        assert_eq!(top.ranked_ids[0], 1);
        assert!(!top.truncated);
        let exact = exact_topk(&query, &db, 3).unwrap();
        assert_eq!(exact.ranked_ids[0], 1);
    }

    #[test]
    fn requesting_more_than_the_database_truncates_with_a_flag() {
        let query = set(9, &[(1, 1.0)]);
        let db = vec![set(0, &[(1, 1.0)]), set(1, &[(2, 1.0)])];
        let got = exact_topk(&query, &db, 10).unwrap();
        assert!(got.truncated);
        assert_eq!(got.ranked_ids.len(), 2);
        let all = exact_topk(&query, &db, 2).unwrap();
        assert!(!all.truncated);
        assert_eq!(all.ranked_ids.len(), 2);
    }

    #[test]
    fn ties_break_toward_the_smaller_doc_id() {
        let query = set(9, &[(1, 1.0)]);
        // Both db docs are disjoint from the query: similarity ties at 0.
        let db = vec![set(7, &[(5, 1.0)]), set(3, &[(6, 1.0)])];
        let got = exact_topk(&query, &db, 2).unwrap();
        assert_eq!(got.ranked_ids, vec![3, 7]);
    }

    #[test]
    fn precision_worked_examples() {
        let truth = [1, 2, 3, 4];
        assert_eq!(precision_at_k(&result(&[1, 2, 3, 4]), &truth, 4), 1.0);
        assert_eq!(precision_at_k(&result(&[9, 8, 7, 6]), &truth, 4), 0.0);
        assert_eq!(precision_at_k(&result(&[1, 9, 2, 8]), &truth, 4), 0.5);
    }

    #[test]
    fn average_precision_worked_examples() {
        // Perfect ranking.
        assert_eq!(
            average_precision_at_k(&result(&[1, 2]), &[1, 2], 2),
            1.0
        );
        // Single relevant item surfacing at rank 2 of 2.
        assert_eq!(average_precision_at_k(&result(&[9, 1]), &[1], 2), 0.5);
        // Relevant item below the cutoff contributes nothing.
        assert_eq!(average_precision_at_k(&result(&[9, 8, 1]), &[1], 2), 0.0);
    }

    #[test]
    fn map_over_random_rankings_matches_expectation() {
        // 20 docs, 5 relevant, depth 5: the expected MAP of a uniformly
        // random ranking is ≈ 0.1421 (estimated by a separate large
        // Monte-Carlo run). 4000 seeded permutations land within ±0.05.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut ids: Vec<u64> = (0..20).collect();
        let truth: Vec<u64> = (0..5).collect();
        let n = 4000;
        let mut results = Vec::with_capacity(n);
        let truths = vec![truth; n];
        for _ in 0..n {
            ids.shuffle(&mut rng);
            results.push(result(&ids));
        }
        let map = map_at_k(&results, &truths, 5);
        assert!((map - 0.1421).abs() < 0.05, "MAP {map}");
    }

    #[test]
    fn map_is_one_exactly_when_rankings_match_ground_truth() {
        let truths = vec![vec![4, 2], vec![9, 1]];
        let results = vec![result(&[4, 2, 7]), result(&[9, 1, 3])];
        assert_eq!(map_at_k(&results, &truths, 2), 1.0);
        let off = vec![result(&[4, 7, 2]), result(&[9, 1, 3])];
        assert!(map_at_k(&off, &truths, 2) < 1.0);
    }
}
