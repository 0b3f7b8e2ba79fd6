//! Min-hash samplers over binary views of a weighted set.
//!
//! `minhash_binary_sample` ignores weights entirely. The quantization
//! samplers expand each element into `⌊scale·weight⌋` subelements and
//! min-hash that expanded binary universe; the fractional variant keeps
//! the remainder as one extra subelement included with probability equal
//! to the fractional part, trading the deterministic rounding loss for
//! sampling noise.

use super::{
    nonempty_entries, require_positive_param, ArgminRace, HashCode, SketchError,
    SparseWeightedSet,
};
use crate::variates::{mix64, Role, VariateKey, VariateSource, GOLDEN_GAMMA};

/// Salt keeping composite subelement ids out of the raw element-id space.
const SUBELEMENT_SALT: u64 = 0xA24B_AED4_963E_E407;

/// Composite id of subelement `j` (1-based) of `element`. Stable across
/// documents, so equal subelements collide; the double mix keeps distinct
/// `(element, j)` pairs from aliasing.
fn subelement_id(element: u64, j: u64) -> u64 {
    mix64(mix64(element ^ SUBELEMENT_SALT).wrapping_add(GOLDEN_GAMMA) ^ j)
}

/// Split `scale·weight` into whole subelement count and remainder.
fn quantize(scale: f64, weight: f64) -> (u64, f64) {
    let scaled = scale * weight;
    let whole = scaled.floor();
    (whole as u64, scaled - whole)
}

/// Plain min-hash on the support, weights ignored.
pub fn minhash_binary_sample<V: VariateSource>(
    set: &SparseWeightedSet,
    source: &V,
    d: u32,
) -> Result<HashCode, SketchError> {
    let mut race = ArgminRace::new();
    for &(element, _weight) in nonempty_entries(set)? {
        let rank = source.uniform01(VariateKey::new(element, d, Role::Uniform));
        race.offer(rank, element);
    }
    Ok(HashCode::Index(race.into_winner().expect("nonempty race").1))
}

/// Min-hash over the quantized subelement universe; the remainder below
/// one subelement is dropped, so `⌊scale·weight⌋ = 0` makes an element
/// vanish.
pub fn wmh_quantize_sample<V: VariateSource>(
    set: &SparseWeightedSet,
    source: &V,
    d: u32,
    scale: f64,
) -> Result<HashCode, SketchError> {
    require_positive_param("scale", scale)?;
    let mut race = ArgminRace::new();
    for &(element, weight) in nonempty_entries(set)? {
        offer_whole_subelements(&mut race, element, weight, scale, source, d);
    }
    finish_subelement_race(race, scale)
}

/// As [`wmh_quantize_sample`], but the remainder survives as one extra
/// subelement included with probability `frac(scale·weight)`.
pub fn haeupler_sample<V: VariateSource>(
    set: &SparseWeightedSet,
    source: &V,
    d: u32,
    scale: f64,
) -> Result<HashCode, SketchError> {
    require_positive_param("scale", scale)?;
    let mut race = ArgminRace::new();
    for &(element, weight) in nonempty_entries(set)? {
        offer_whole_subelements(&mut race, element, weight, scale, source, d);
        if let Some(sub) = fractional_subelement(element, weight, scale, source, d) {
            offer_subelement(&mut race, sub, source, d);
        }
    }
    finish_subelement_race(race, scale)
}

fn offer_whole_subelements<V: VariateSource>(
    race: &mut ArgminRace<u64>,
    element: u64,
    weight: f64,
    scale: f64,
    source: &V,
    d: u32,
) {
    let (whole, _frac) = quantize(scale, weight);
    for j in 1..=whole {
        offer_subelement(race, subelement_id(element, j), source, d);
    }
}

fn offer_subelement<V: VariateSource>(race: &mut ArgminRace<u64>, sub: u64, source: &V, d: u32) {
    let rank = source.uniform01(VariateKey::new(sub, d, Role::Uniform));
    race.offer(rank, sub);
}

/// The extra subelement for the fractional remainder, if this sample
/// keeps it. The inclusion draw is keyed by the raw element so it is
/// independent of every subelement ranking draw.
fn fractional_subelement<V: VariateSource>(
    element: u64,
    weight: f64,
    scale: f64,
    source: &V,
    d: u32,
) -> Option<u64> {
    let (whole, frac) = quantize(scale, weight);
    if frac > 0.0 && source.uniform01(VariateKey::new(element, d, Role::Uniform)) < frac {
        Some(subelement_id(element, whole + 1))
    } else {
        None
    }
}

fn finish_subelement_race(race: ArgminRace<u64>, scale: f64) -> Result<HashCode, SketchError> {
    match race.into_winner() {
        Some((_, sub)) => Ok(HashCode::Index(sub)),
        None => Err(SketchError::DegenerateQuantization { scale }),
    }
}
