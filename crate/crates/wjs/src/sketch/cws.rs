//! Weight-proportional samplers.
//!
//! The three pair-valued samplers share one shape: for every element an
//! "active point" `y` is placed just below the weight on a geometric (or
//! arithmetic) grid, a grid point `z` lands at or above the weight, and
//! the element competes in a race with statistic `a = c / z` for an
//! independent gamma scale `c`. The argmin of `a` picks the sampled
//! element with probability proportional to a function of its weight, and
//! the floor-quantized grid is what lets two different sets produce
//! bit-identical codes.
//!
//! The index-only samplers here are the discarded-payload variant of the
//! geometric race and the activation-threshold sampler.

use super::{
    nonempty_entries, require_positive_param, ArgminRace, HashCode, SketchError,
    SparseWeightedSet,
};
use crate::variates::{Role, VariateKey, VariateSource};

/// Race quantities of one element at one sample index: the active point
/// `y` (in `(0, weight]`), the grid point `z` at or above the weight, and
/// the race statistic `a = c / z`.
#[derive(Debug, Clone, Copy)]
pub struct RaceComponents {
    pub y: f64,
    pub z: f64,
    pub a: f64,
}

/// Keep a computed active point inside its half-open home `(0, weight]`.
/// The floor arithmetic guarantees this mathematically; the clamp only
/// absorbs last-ulp rounding so the emitted payload never escapes the
/// documented range.
fn clamp_active(y: f64, weight: f64) -> f64 {
    y.max(f64::MIN_POSITIVE).min(weight)
}

fn geometric_active_point(r: f64, beta: f64, weight: f64) -> f64 {
    let t = (weight.ln() / r + beta).floor();
    clamp_active((r * (t - beta)).exp(), weight)
}

/// Components for the single-rate geometric race: one `(r, β)` pair
/// drives both the active point and the grid point above the weight
/// (`ln z = ln y + r`).
pub fn icws_race_components<V: VariateSource>(
    element_id: u64,
    weight: f64,
    source: &V,
    d: u32,
) -> RaceComponents {
    let r = source.gamma21(VariateKey::new(element_id, d, Role::RateA));
    let beta = source.uniform01(VariateKey::new(element_id, d, Role::OffsetA));
    let c = source.gamma21(VariateKey::new(element_id, d, Role::Scale));
    let y = geometric_active_point(r, beta, weight);
    let z = y * r.exp();
    RaceComponents { y, z, a: c / z }
}

/// Components for the two-rate geometric race: the grid point `z` (and
/// hence the race) runs on its own `(r, β)` pair, decoupled from the pair
/// that places the active point `y`.
pub fn i2cws_race_components<V: VariateSource>(
    element_id: u64,
    weight: f64,
    source: &V,
    d: u32,
) -> RaceComponents {
    let (z, a) = i2cws_selection(element_id, weight, source, d);
    let y = i2cws_active_point(element_id, weight, source, d);
    RaceComponents { y, z, a }
}

fn i2cws_selection<V: VariateSource>(
    element_id: u64,
    weight: f64,
    source: &V,
    d: u32,
) -> (f64, f64) {
    let r = source.gamma21(VariateKey::new(element_id, d, Role::RateB));
    let beta = source.uniform01(VariateKey::new(element_id, d, Role::OffsetB));
    let c = source.gamma21(VariateKey::new(element_id, d, Role::Scale));
    let t = (weight.ln() / r + beta).floor();
    let z = (r * (t - beta + 1.0)).exp();
    (z, c / z)
}

fn i2cws_active_point<V: VariateSource>(
    element_id: u64,
    weight: f64,
    source: &V,
    d: u32,
) -> f64 {
    let r = source.gamma21(VariateKey::new(element_id, d, Role::RateA));
    let beta = source.uniform01(VariateKey::new(element_id, d, Role::OffsetA));
    geometric_active_point(r, beta, weight)
}

fn ccws_components<V: VariateSource>(
    element_id: u64,
    weight: f64,
    source: &V,
    d: u32,
) -> RaceComponents {
    let r = source.gamma21(VariateKey::new(element_id, d, Role::RateA));
    let beta = source.uniform01(VariateKey::new(element_id, d, Role::OffsetA));
    let c = source.gamma21(VariateKey::new(element_id, d, Role::Scale));
    let t = (weight / r + beta).floor();
    let y = clamp_active(r * (t - beta), weight);
    let z = y + r;
    RaceComponents { y, z, a: c / z }
}

fn icws_winner<V: VariateSource>(
    set: &SparseWeightedSet,
    source: &V,
    d: u32,
) -> Result<(u64, f64), SketchError> {
    let mut race = ArgminRace::new();
    for &(element, weight) in nonempty_entries(set)? {
        let comp = icws_race_components(element, weight, source, d);
        race.offer(comp.a, (element, comp.y));
    }
    Ok(race.into_winner().expect("nonempty race").1)
}

/// Single-rate geometric race; emits the winning `(k*, y)` pair.
pub fn icws_sample<V: VariateSource>(
    set: &SparseWeightedSet,
    source: &V,
    d: u32,
) -> Result<HashCode, SketchError> {
    let (element, y) = icws_winner(set, source, d)?;
    Ok(HashCode::pair(element, y))
}

/// The same race as [`icws_sample`] with the payload discarded: the
/// winning index stream is bit-identical by construction.
pub fn li2015_sample<V: VariateSource>(
    set: &SparseWeightedSet,
    source: &V,
    d: u32,
) -> Result<HashCode, SketchError> {
    let (element, _y) = icws_winner(set, source, d)?;
    Ok(HashCode::Index(element))
}

/// Two-rate geometric race; the active point is evaluated once, for the
/// winner only, after the race has settled.
pub fn i2cws_sample<V: VariateSource>(
    set: &SparseWeightedSet,
    source: &V,
    d: u32,
) -> Result<HashCode, SketchError> {
    let mut race = ArgminRace::new();
    for &(element, weight) in nonempty_entries(set)? {
        let (_z, a) = i2cws_selection(element, weight, source, d);
        race.offer(a, (element, weight));
    }
    let (element, weight) = race.into_winner().expect("nonempty race").1;
    let y = i2cws_active_point(element, weight, source, d);
    Ok(HashCode::pair(element, y))
}

/// Arithmetic-grid race: quantizes the weight axis directly instead of
/// its logarithm.
pub fn ccws_sample<V: VariateSource>(
    set: &SparseWeightedSet,
    source: &V,
    d: u32,
) -> Result<HashCode, SketchError> {
    let mut race = ArgminRace::new();
    for &(element, weight) in nonempty_entries(set)? {
        let comp = ccws_components(element, weight, source, d);
        race.offer(comp.a, (element, comp.y));
    }
    let (element, y) = race.into_winner().expect("nonempty race").1;
    Ok(HashCode::pair(element, y))
}

/// Activation-threshold sampler: element `k` joins the candidate pool
/// with probability `weight / w_max`, then plain min-hashing ranks the
/// pool. When nothing activates, the sample is [`HashCode::Empty`], which
/// collides with nothing.
pub fn gollapudi_threshold_sample<V: VariateSource>(
    set: &SparseWeightedSet,
    source: &V,
    d: u32,
    w_max: f64,
) -> Result<HashCode, SketchError> {
    require_positive_param("w_max", w_max)?;
    let mut race = ArgminRace::new();
    for &(element, weight) in nonempty_entries(set)? {
        let activation = source.uniform01(VariateKey::new(element, d, Role::Uniform));
        if activation <= weight / w_max {
            let rank = source.uniform01(VariateKey::new(element, d, Role::OffsetA));
            race.offer(rank, element);
        }
    }
    Ok(match race.into_winner() {
        Some((_, element)) => HashCode::Index(element),
        None => HashCode::Empty,
    })
}
