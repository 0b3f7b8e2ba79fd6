//! Heavy distributional verification of the variate layer and the
//! synthetic corpus generator: million-draw marginals, cross-role
//! correlations, and the weight-dispersion shape the retrieval harness
//! leans on. These run in seconds because the test profile is optimized.

use wjs::stats::{ks_critical_alpha01, ks_statistic, pearson_correlation, sample_mean_variance};
use wjs::synth::{generate_corpus, SynthConfig, WeightLaw};
use wjs::variates::{Role, VariateKey, VariateScheme, VariateSource};

const SEED: u64 = 20_260_817;
const N: usize = 1_000_000;

fn scheme() -> VariateScheme {
    VariateScheme::new(SEED, 1024).unwrap()
}

fn keys(role: Role) -> impl Iterator<Item = VariateKey> {
    (0..N).map(move |i| VariateKey::new((i / 1024) as u64, (i % 1024) as u32, role))
}

#[test]
fn uniform_stream_survives_a_million_draw_ks_test() {
    let scheme = scheme();
    let mut draws: Vec<f64> = keys(Role::Uniform).map(|k| scheme.uniform01(k)).collect();
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = ks_statistic(&draws, |x| x);
    let crit = ks_critical_alpha01(N);
    assert!(ks < crit, "KS {ks:.6} vs critical {crit:.6}");
}

#[test]
fn power_of_uniforms_transform_is_uniform_at_a_million_draws() {
    let scheme = scheme();
    let mut draws: Vec<f64> = (0..N)
        .map(|i| {
            let element = (i / 1024) as u64;
            let index = (i % 1024) as u32;
            scheme.uniform_power(
                VariateKey::new(element, index, Role::RateB),
                VariateKey::new(element, index, Role::OffsetB),
            )
        })
        .collect();
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = ks_statistic(&draws, |x| x);
    let crit = ks_critical_alpha01(N);
    assert!(ks < crit, "KS {ks:.6} vs critical {crit:.6}");
}

#[test]
fn gamma_stream_has_the_right_first_two_moments() {
    let scheme = scheme();
    let draws: Vec<f64> = keys(Role::RateA).map(|k| scheme.gamma21(k)).collect();
    let (mean, var) = sample_mean_variance(&draws);
    assert!((mean - 2.0).abs() < 0.01, "mean {mean:.5}, want 2 ± 0.01");
    assert!((var - 2.0).abs() < 0.03, "variance {var:.5}, want 2 ± 0.03");
}

#[test]
fn all_role_pairs_are_uncorrelated() {
    const M: usize = 100_000;
    let scheme = scheme();
    let roles = [
        Role::RateA,
        Role::OffsetA,
        Role::Scale,
        Role::RateB,
        Role::OffsetB,
        Role::Uniform,
    ];
    let streams: Vec<Vec<f64>> = roles
        .iter()
        .map(|&role| {
            (0..M)
                .map(|i| {
                    scheme.uniform01(VariateKey::new((i / 1024) as u64, (i % 1024) as u32, role))
                })
                .collect()
        })
        .collect();
    for i in 0..roles.len() {
        for j in (i + 1)..roles.len() {
            let r = pearson_correlation(&streams[i], &streams[j]);
            assert!(
                r.abs() < 0.012,
                "roles {:?}/{:?} correlate at {r:+.5}",
                roles[i],
                roles[j]
            );
        }
    }
}

#[test]
fn neighboring_keys_are_uncorrelated() {
    const M: usize = 100_000;
    let scheme = scheme();
    let a: Vec<f64> = (0..M)
        .map(|i| scheme.uniform01(VariateKey::new(i as u64, 0, Role::Uniform)))
        .collect();
    let next_element: Vec<f64> = (0..M)
        .map(|i| scheme.uniform01(VariateKey::new(i as u64 + 1, 0, Role::Uniform)))
        .collect();
    let next_index: Vec<f64> = (0..M)
        .map(|i| scheme.uniform01(VariateKey::new(i as u64, 1, Role::Uniform)))
        .collect();
    let r_elem = pearson_correlation(&a, &next_element);
    let r_idx = pearson_correlation(&a, &next_index);
    assert!(r_elem.abs() < 0.012, "element-neighbor correlation {r_elem:+.5}");
    assert!(r_idx.abs() < 0.012, "index-neighbor correlation {r_idx:+.5}");
}

/// Mean over features (held by at least two documents) of the sample
/// standard deviation of that feature's weights across documents.
fn mean_per_feature_weight_std(docs: &[wjs::sketch::SparseWeightedSet]) -> f64 {
    use std::collections::HashMap;
    let mut by_feature: HashMap<u64, Vec<f64>> = HashMap::new();
    for doc in docs {
        for &(feature, weight) in doc.entries() {
            by_feature.entry(feature).or_default().push(weight);
        }
    }
    let stds: Vec<f64> = by_feature
        .values()
        .filter(|ws| ws.len() >= 2)
        .map(|ws| sample_mean_variance(ws).1.sqrt())
        .collect();
    assert!(!stds.is_empty(), "corpus too sparse to measure dispersion");
    stds.iter().sum::<f64>() / stds.len() as f64
}

#[test]
fn uniform_corpus_weight_dispersion_matches_the_law() {
    let docs = generate_corpus(&SynthConfig {
        doc_count: 200,
        feature_count: 5_000,
        density: 0.05,
        law: WeightLaw::Uniform { lo: 0.0, hi: 1.0 },
        gen_seed: 2026,
    })
    .unwrap();
    assert_eq!(docs.len(), 200);
    assert!(docs.iter().all(|d| d.len() == 250), "0.05 of 5000 features");
    let spread = mean_per_feature_weight_std(&docs);
    // About ten docs share each feature, so the small-sample std of a
    // Uniform(0,1] weight sits a little under 1/sqrt(12).
    let anchor = 0.2637;
    assert!(
        (spread - anchor).abs() < 0.2 * anchor,
        "per-feature weight std {spread:.4}, want within 20% of {anchor}"
    );
}

#[test]
fn power_law_corpus_weight_dispersion_matches_the_law() {
    let docs = generate_corpus(&SynthConfig {
        doc_count: 200,
        feature_count: 5_000,
        density: 0.05,
        law: WeightLaw::PowerLaw {
            exponent: 3.0,
            scale: 1.0,
        },
        gen_seed: 2026,
    })
    .unwrap();
    let spread = mean_per_feature_weight_std(&docs);
    let anchor = 0.5189;
    assert!(
        (spread - anchor).abs() < 0.25 * anchor,
        "per-feature weight std {spread:.4}, want within 25% of {anchor}"
    );
    assert!(
        docs.iter()
            .flat_map(|d| d.entries())
            .all(|&(_, w)| w >= 1.0),
        "Pareto weights sit above the scale parameter"
    );
}

#[test]
fn binary_estimator_concentrates_on_set_jaccard() {
    use wjs::similarity::{binary_jaccard, estimate_similarity};
    use wjs::sketch::{sketch, Algorithm, SparseWeightedSet};

    // Two binary sets with Jaccard 9/21.
    let a = SparseWeightedSet::new(0, (0..15u64).map(|k| (k, 1.0))).unwrap();
    let b = SparseWeightedSet::new(1, (6..21u64).map(|k| (k, 1.0))).unwrap();
    let exact = binary_jaccard(&a, &b).unwrap();
    let scheme = VariateScheme::new(99, 2048).unwrap();
    let fa = sketch(&a, &scheme, Algorithm::MinHash).unwrap();
    let fb = sketch(&b, &scheme, Algorithm::MinHash).unwrap();
    let est = estimate_similarity(&fa, &fb).unwrap();
    assert!(
        (est - exact).abs() < 0.03,
        "estimate {est:.4} vs exact {exact:.4} at D = 2048"
    );
}
