//! Named statistical self-checks over the samplers and the variate layer.
//!
//! Each check pins one distributional or structural promise the samplers
//! are supposed to keep — selection proportional to weight, uniform
//! active points, exponential race statistics, sample agreement across
//! set shrinking — and measures it on fresh draws at a fixed seed. The
//! thresholds are standard α = 0.01 critical values, so a healthy build
//! reports PASS on every check that the underlying sampler actually
//! satisfies.
//!
//! Two checks document measured behavior rather than aspirations:
//!
//! * `consistency(i2cws)` fails. The two-stage sampler picks its winner
//!   from one discretized race but reports an active point anchored to a
//!   second, independent grid, and when a set's weights shrink the two
//!   grids move independently — the winning element can change even when
//!   the old sample was still valid for the shrunken set. The one-stage
//!   samplers keep this promise exactly, and the check proves it on the
//!   same inputs.
//! * `joint-tail-dependence(icws)` fails. Sharing one rate between the
//!   active point and the race scale looks like it should couple their
//!   tails, but the joint tail frequency is indistinguishable from the
//!   independent product at this sample size; the check asks for a
//!   deviation and honestly reports that none is measurable.

use crate::sketch::{
    i2cws_race_components, icws_race_components, sketch, Algorithm, SparseWeightedSet,
};
use crate::similarity::trial_seed;
use crate::stats::{
    chi2_critical_alpha01, chi2_statistic, ks_critical_alpha01, ks_statistic,
    pearson_correlation, sample_mean_variance,
};
use crate::variates::{Role, VariateKey, VariateScheme, VariateSource};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

const MARGINAL_DRAWS: usize = 100_000;
const SELECTION_DRAWS: u32 = 100_000;
const SINGLETON_DRAWS: u32 = 100_000;
const CONSISTENCY_PAIRS: usize = 1_000;
const CONSISTENCY_D: u32 = 16;
const MONOTONICITY_DRAWS: usize = 2_000;

/// The weighted set every selection check draws from. Weights span a
/// 10x range and sum to 10, so expected selection counts are easy to
/// read off.
fn reference_selection_set() -> SparseWeightedSet {
    SparseWeightedSet::new(
        0,
        vec![(1, 0.5), (2, 1.0), (3, 1.5), (4, 2.0), (5, 5.0)],
    )
    .expect("static set is valid")
}

/// Spread `n` draws across elements and sample indices so no single
/// stream is reused.
fn spread_keys(n: usize, role: Role) -> impl Iterator<Item = VariateKey> {
    (0..n).map(move |i| VariateKey::new((i / 256) as u64, (i % 256) as u32, role))
}

fn scheme_for_marginals(seed: u64) -> VariateScheme {
    VariateScheme::new(seed, 256).expect("nonzero sample count")
}

/// KS test of the generic uniform stream against Uniform(0, 1).
pub fn variate_uniform_marginal(seed: u64) -> CheckOutcome {
    let scheme = scheme_for_marginals(seed);
    let mut draws: Vec<f64> = spread_keys(MARGINAL_DRAWS, Role::Uniform)
        .map(|k| scheme.uniform01(k))
        .collect();
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = ks_statistic(&draws, |x| x);
    let crit = ks_critical_alpha01(MARGINAL_DRAWS);
    CheckOutcome::new(
        "variate-uniform-ks",
        ks < crit,
        format!("KS {ks:.5} vs critical {crit:.5} at n = {MARGINAL_DRAWS}"),
    )
}

/// Moment check of the rate stream against Gamma(2, 1): mean 2, variance 2.
pub fn variate_gamma_moments(seed: u64) -> CheckOutcome {
    let scheme = scheme_for_marginals(seed);
    let draws: Vec<f64> = spread_keys(MARGINAL_DRAWS, Role::RateA)
        .map(|k| scheme.gamma21(k))
        .collect();
    let (mean, var) = sample_mean_variance(&draws);
    let ok = (mean - 2.0).abs() < 0.02 && (var - 2.0).abs() < 0.06;
    CheckOutcome::new(
        "variate-gamma-moments",
        ok,
        format!("mean {mean:.4} (want 2 ± 0.02), variance {var:.4} (want 2 ± 0.06)"),
    )
}

/// KS test of `exp(-r·b)` — the power-of-uniforms transform the samplers
/// lean on — against Uniform(0, 1).
pub fn variate_power_marginal(seed: u64) -> CheckOutcome {
    let scheme = scheme_for_marginals(seed);
    let mut draws: Vec<f64> = (0..MARGINAL_DRAWS)
        .map(|i| {
            let element = (i / 256) as u64;
            let index = (i % 256) as u32;
            scheme.uniform_power(
                VariateKey::new(element, index, Role::RateA),
                VariateKey::new(element, index, Role::OffsetA),
            )
        })
        .collect();
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = ks_statistic(&draws, |x| x);
    let crit = ks_critical_alpha01(MARGINAL_DRAWS);
    CheckOutcome::new(
        "variate-power-ks",
        ks < crit,
        format!("KS {ks:.5} vs critical {crit:.5} at n = {MARGINAL_DRAWS}"),
    )
}

/// Pearson correlation across roles of the same key must vanish.
pub fn variate_role_independence(seed: u64) -> CheckOutcome {
    let scheme = scheme_for_marginals(seed);
    let mut offsets_a = Vec::with_capacity(MARGINAL_DRAWS);
    let mut offsets_b = Vec::with_capacity(MARGINAL_DRAWS);
    let mut rates = Vec::with_capacity(MARGINAL_DRAWS);
    for i in 0..MARGINAL_DRAWS {
        let element = (i / 256) as u64;
        let index = (i % 256) as u32;
        offsets_a.push(scheme.uniform01(VariateKey::new(element, index, Role::OffsetA)));
        offsets_b.push(scheme.uniform01(VariateKey::new(element, index, Role::OffsetB)));
        rates.push(scheme.gamma21(VariateKey::new(element, index, Role::RateA)));
    }
    let r_uu = pearson_correlation(&offsets_a, &offsets_b);
    let r_gu = pearson_correlation(&rates, &offsets_a);
    let ok = r_uu.abs() < 0.01 && r_gu.abs() < 0.01;
    CheckOutcome::new(
        "variate-role-independence",
        ok,
        format!("corr(offsetA, offsetB) = {r_uu:+.5}, corr(rateA, offsetA) = {r_gu:+.5}, want |r| < 0.01"),
    )
}

/// Chi-squared test that each element wins in proportion to its weight.
///
/// This holds for the geometric-grid samplers, whose race statistic for
/// an element of weight `w` is exactly Exponential(w). The weight-axis
/// grid sampler has no such law — its race statistic is `c/(y + r)` with
/// `y` uniform on `(w − r, w]` — and it measurably over-selects light
/// elements, so it is not part of the default run (a unit test documents
/// the deviation instead).
pub fn selection_proportionality(algorithm: Algorithm, seed: u64) -> CheckOutcome {
    let set = reference_selection_set();
    let total: f64 = set.entries().iter().map(|&(_, w)| w).sum();
    let scheme = VariateScheme::new(seed, SELECTION_DRAWS).expect("nonzero sample count");
    let fp = sketch(&set, &scheme, algorithm).expect("nonempty set sketches");
    let mut observed = [0u64; 5];
    for code in fp.codes() {
        let element = code.element().expect("weighted samplers always select") as usize;
        observed[element - 1] += 1;
    }
    let expected: Vec<f64> = set
        .entries()
        .iter()
        .map(|&(_, w)| w / total * f64::from(SELECTION_DRAWS))
        .collect();
    let chi2 = chi2_statistic(&observed, &expected);
    let crit = chi2_critical_alpha01(4);
    CheckOutcome::new(
        format!("selection-proportionality({})", algorithm.name()),
        chi2 < crit,
        format!("chi2 {chi2:.3} vs critical {crit:.3} (dof 4, {SELECTION_DRAWS} draws)"),
    )
}

/// KS test that a singleton's active point is Uniform(0, weight].
pub fn active_point_uniformity(seed: u64, weight: f64) -> CheckOutcome {
    let set = SparseWeightedSet::new(0, vec![(7, weight)]).expect("singleton is valid");
    let scheme = VariateScheme::new(seed, SINGLETON_DRAWS).expect("nonzero sample count");
    let fp = sketch(&set, &scheme, Algorithm::I2cws).expect("singleton sketches");
    let mut ys: Vec<f64> = fp
        .codes()
        .iter()
        .map(|c| c.y().expect("pair-valued codes"))
        .collect();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = ks_statistic(&ys, |y| y / weight);
    let crit = ks_critical_alpha01(SINGLETON_DRAWS as usize);
    CheckOutcome::new(
        "active-point-uniformity(i2cws)",
        ks < crit,
        format!(
            "KS {ks:.5} vs critical {crit:.5} against Uniform(0, {weight}] at n = {SINGLETON_DRAWS}"
        ),
    )
}

/// KS test that a singleton's race statistic is Exponential(weight).
///
/// For a one-element set the winning statistic `a` has survival function
/// `exp(-weight·a)`, which is what makes the argmin race select
/// proportionally in the first place; this pins the whole transform
/// chain, not just the marginals feeding it.
pub fn race_statistic_exponential(seed: u64, weights: &[f64]) -> CheckOutcome {
    let scheme = VariateScheme::new(seed, SINGLETON_DRAWS).expect("nonzero sample count");
    let mut details = Vec::new();
    let mut all_ok = true;
    let crit = ks_critical_alpha01(SINGLETON_DRAWS as usize);
    for &weight in weights {
        let mut draws: Vec<f64> = (0..SINGLETON_DRAWS)
            .map(|d| i2cws_race_components(11, weight, &scheme, d).a)
            .collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = ks_statistic(&draws, |a| 1.0 - (-weight * a).exp());
        all_ok &= ks < crit;
        details.push(format!("S = {weight}: KS {ks:.5}"));
    }
    CheckOutcome::new(
        "race-statistic-exponential(i2cws)",
        all_ok,
        format!("{} vs critical {crit:.5}", details.join(", ")),
    )
}

/// Joint lower-tail frequency of the active point and the race scale.
///
/// Both `y/S` and `S/z` are marginally Uniform(0, 1), so under
/// independence `Pr[y/S < 0.1 and S/z < 0.1]` is exactly 0.01. The
/// two-stage sampler draws the two sides from separate streams and must
/// land inside 0.01 ± 0.002.
pub fn joint_tail_independence_i2cws(seed: u64) -> CheckOutcome {
    let freq = joint_tail_frequency(seed, |scheme, d| {
        let c = i2cws_race_components(11, 1.0, scheme, d);
        (c.y, c.z)
    });
    let dev = (freq - 0.01).abs();
    CheckOutcome::new(
        "joint-tail-independence(i2cws)",
        dev <= 0.002,
        format!("joint tail frequency {freq:.5}, want within 0.01 ± 0.002"),
    )
}

/// The same joint tail for the shared-rate sampler, where the check asks
/// for a measurable departure from independence (deviation > 0.002).
///
/// This check fails: `(y/S, S/z)` there is `(p^b, p^(1-b))` for one
/// product-of-uniforms `p` and one uniform `b`, and that pair is itself
/// distributed as two independent uniforms, so no deviation exists to
/// detect. It is kept because it documents a measured fact about the
/// construction that is easy to assume wrongly.
pub fn joint_tail_dependence_icws(seed: u64) -> CheckOutcome {
    let freq = joint_tail_frequency(seed, |scheme, d| {
        let c = icws_race_components(11, 1.0, scheme, d);
        (c.y, c.z)
    });
    let dev = (freq - 0.01).abs();
    CheckOutcome::new(
        "joint-tail-dependence(icws)",
        dev > 0.002,
        format!(
            "joint tail frequency {freq:.5} deviates from 0.01 by {dev:.5}, \
             want > 0.002; the shared rate leaves no measurable joint-tail signature"
        ),
    )
}

fn joint_tail_frequency(
    seed: u64,
    components: impl Fn(&VariateScheme, u32) -> (f64, f64),
) -> f64 {
    let scheme = VariateScheme::new(seed, SINGLETON_DRAWS).expect("nonzero sample count");
    let mut hits = 0u32;
    for d in 0..SINGLETON_DRAWS {
        let (y, z) = components(&scheme, d);
        if y < 0.1 && 1.0 / z < 0.1 {
            hits += 1;
        }
    }
    f64::from(hits) / f64::from(SINGLETON_DRAWS)
}

/// Growing one element's weight must never worsen its race position:
/// the statistic `a` may only fall and the active point `y` and scale
/// `z` may only rise. Checked exactly, with no tolerance.
pub fn weight_monotonicity(seed: u64) -> CheckOutcome {
    let scheme = VariateScheme::new(seed, 64).expect("nonzero sample count");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    for _ in 0..MONOTONICITY_DRAWS {
        let element: u64 = rng.gen();
        let d: u32 = rng.gen_range(0..64);
        let w = 10f64.powf(rng.gen_range(-2.0..1.3));
        let small = i2cws_race_components(element, w, &scheme, d);
        let big = i2cws_race_components(element, 1.7 * w, &scheme, d);
        if big.a > small.a || big.y < small.y || big.z < small.z {
            violations += 1;
        }
    }
    CheckOutcome::new(
        "weight-monotonicity(i2cws)",
        violations == 0,
        format!("{violations} violations in {MONOTONICITY_DRAWS} weight-increase probes"),
    )
}

/// Draw a random weighted set and a shrunken subset of it.
///
/// The subset drops each element with probability 0.2 and scales the
/// survivors' weights by a factor in [0.3, 1), so every subset weight is
/// at most its source weight.
fn subset_pair(rng: &mut ChaCha8Rng) -> (SparseWeightedSet, SparseWeightedSet) {
    let n = rng.gen_range(4..=24);
    let ids = rand::seq::index::sample(rng, 200, n);
    let entries: Vec<(u64, f64)> = ids
        .iter()
        .map(|id| (id as u64, 2.0 * (1.0 - rng.gen::<f64>())))
        .collect();
    let mut sub = Vec::with_capacity(entries.len());
    for &(id, w) in &entries {
        if rng.gen::<f64>() < 0.8 {
            sub.push((id, w * (0.3 + 0.7 * rng.gen::<f64>())));
        }
    }
    if sub.is_empty() {
        let &(id, w) = &entries[0];
        sub.push((id, w * (0.3 + 0.7 * rng.gen::<f64>())));
    }
    let s = SparseWeightedSet::new(0, entries).expect("generated weights are positive");
    let t = SparseWeightedSet::new(1, sub).expect("generated weights are positive");
    (s, t)
}

/// Sample agreement under set shrinking.
///
/// Whenever the sample drawn from the larger set is still a valid sample
/// of the smaller one — its element survived and its active point still
/// fits under the shrunken weight — a consistent sampler must emit the
/// bit-identical code for the smaller set. Counts every eligible sample
/// across random (set, subset) pairs; a single differing code is a
/// violation.
pub fn consistency_under_shrinking(algorithm: Algorithm, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eligible = 0usize;
    let mut violations = 0usize;
    for pair in 0..CONSISTENCY_PAIRS {
        let (s, t) = subset_pair(&mut rng);
        let scheme =
            VariateScheme::new(trial_seed(seed, pair), CONSISTENCY_D).expect("nonzero samples");
        let fp_s = sketch(&s, &scheme, algorithm).expect("nonempty set");
        let fp_t = sketch(&t, &scheme, algorithm).expect("nonempty subset");
        for (code_s, code_t) in fp_s.codes().iter().zip(fp_t.codes()) {
            let element = code_s.element().expect("weighted samplers always select");
            let y = code_s.y().expect("pair-valued algorithms only");
            let still_valid = t.weight(element).is_some_and(|tw| y <= tw);
            if still_valid {
                eligible += 1;
                if code_s != code_t {
                    violations += 1;
                }
            }
        }
    }
    let mut detail = format!(
        "{violations} violations / {eligible} eligible samples \
         ({CONSISTENCY_PAIRS} set pairs, D = {CONSISTENCY_D})"
    );
    if violations > 0 {
        detail.push_str(
            "; the winner comes from one discretized race but its active point \
             is anchored to an independent grid, and shrinking weights moves \
             the two out of step",
        );
    }
    CheckOutcome::new(
        format!("consistency({})", algorithm.name()),
        violations == 0,
        detail,
    )
}

/// The index-only sampler must walk the exact same selection stream as
/// the pair-valued one: same winners at every position, payload dropped.
pub fn index_stream_alignment(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0usize;
    let mut positions = 0usize;
    for _ in 0..20 {
        let n = rng.gen_range(3..=40);
        let ids = rand::seq::index::sample(&mut rng, 500, n);
        let entries: Vec<(u64, f64)> = ids
            .iter()
            .map(|id| (id as u64, 3.0 * (1.0 - rng.gen::<f64>())))
            .collect();
        let set = SparseWeightedSet::new(0, entries).expect("generated weights are positive");
        let scheme = VariateScheme::new(seed.wrapping_add(1), 128).expect("nonzero samples");
        let pair = sketch(&set, &scheme, Algorithm::Icws).expect("nonempty set");
        let index = sketch(&set, &scheme, Algorithm::Li2015).expect("nonempty set");
        for (p, i) in pair.codes().iter().zip(index.codes()) {
            positions += 1;
            if p.element() != i.element() {
                mismatches += 1;
            }
        }
    }
    CheckOutcome::new(
        "index-stream-alignment(li2015)",
        mismatches == 0,
        format!("{mismatches} winner mismatches across {positions} positions vs icws"),
    )
}

/// Run every check at its standard scale, in a stable order.
pub fn run_default_checks(seed: u64) -> Vec<CheckOutcome> {
    vec![
        variate_uniform_marginal(seed),
        variate_gamma_moments(seed),
        variate_power_marginal(seed),
        variate_role_independence(seed),
        selection_proportionality(Algorithm::I2cws, seed),
        selection_proportionality(Algorithm::Icws, seed),
        active_point_uniformity(seed, 3.7),
        race_statistic_exponential(seed, &[0.1, 1.0, 10.0]),
        joint_tail_independence_i2cws(seed),
        joint_tail_dependence_icws(seed),
        weight_monotonicity(seed),
        consistency_under_shrinking(Algorithm::Icws, seed),
        consistency_under_shrinking(Algorithm::Ccws, seed),
        consistency_under_shrinking(Algorithm::I2cws, seed),
        index_stream_alignment(seed),
    ]
}
