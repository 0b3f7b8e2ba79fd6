//! Fingerprint sketching: eight algorithms behind one interface.
//!
//! A sketch maps a [`SparseWeightedSet`] to a length-D [`Fingerprint`]
//! whose per-position collision rate against another fingerprint
//! estimates a similarity between the underlying sets. The weighted
//! samplers target the generalized Jaccard similarity
//! `Σ min(S_k, T_k) / Σ max(S_k, T_k)`; the binary sampler targets plain
//! set Jaccard and is kept as a baseline.
//!
//! All randomness flows through a [`VariateSource`] keyed by
//! `(element, sample index, role)`, so fingerprints from different
//! processes, documents, or insertion orders are directly comparable as
//! long as the master seed matches.

mod cws;
mod minwise;
mod set;

pub use cws::{
    ccws_sample, gollapudi_threshold_sample, i2cws_race_components, i2cws_sample,
    icws_race_components, icws_sample, li2015_sample, RaceComponents,
};
pub use minwise::{haeupler_sample, minhash_binary_sample, wmh_quantize_sample};
pub use set::{SetError, SparseWeightedSet};

use crate::variates::{VariateError, VariateScheme, VariateSource};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SketchError {
    #[error("cannot sketch an empty set")]
    EmptySet,
    #[error("quantization scale {scale} left no subelements for any element")]
    DegenerateQuantization { scale: f64 },
    #[error("parameter {name} must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Variate(#[from] VariateError),
}

/// The sketching algorithms, with their tuning parameters where one exists.
///
/// The unit variants take no parameters; `Wmh`/`Haeupler` carry the
/// quantization scale and `Gollapudi` carries the activation normalizer
/// (an upper bound on corpus weights).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    MinHash,
    Wmh { scale: f64 },
    Haeupler { scale: f64 },
    Gollapudi { w_max: f64 },
    Icws,
    Li2015,
    Ccws,
    I2cws,
}

impl Algorithm {
    pub const DEFAULT_SCALE: f64 = 10.0;

    /// Stable identifier used by the CLI and in report files.
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::MinHash => "minhash",
            Algorithm::Wmh { .. } => "wmh",
            Algorithm::Haeupler { .. } => "haeupler",
            Algorithm::Gollapudi { .. } => "gollapudi",
            Algorithm::Icws => "icws",
            Algorithm::Li2015 => "li2015",
            Algorithm::Ccws => "ccws",
            Algorithm::I2cws => "i2cws",
        }
    }

    /// Whether codes carry a payload word beyond the element id.
    pub fn pair_valued(&self) -> bool {
        matches!(
            self,
            Algorithm::Icws | Algorithm::Ccws | Algorithm::I2cws
        )
    }

    /// Wire encoding for fingerprint files: a tag byte plus the parameter
    /// (0.0 for parameterless variants).
    pub(crate) fn wire(&self) -> (u8, f64) {
        match *self {
            Algorithm::MinHash => (0, 0.0),
            Algorithm::Wmh { scale } => (1, scale),
            Algorithm::Haeupler { scale } => (2, scale),
            Algorithm::Gollapudi { w_max } => (3, w_max),
            Algorithm::Icws => (4, 0.0),
            Algorithm::Li2015 => (5, 0.0),
            Algorithm::Ccws => (6, 0.0),
            Algorithm::I2cws => (7, 0.0),
        }
    }

    pub(crate) fn from_wire(tag: u8, param: f64) -> Option<Self> {
        Some(match tag {
            0 => Algorithm::MinHash,
            1 => Algorithm::Wmh { scale: param },
            2 => Algorithm::Haeupler { scale: param },
            3 => Algorithm::Gollapudi { w_max: param },
            4 => Algorithm::Icws,
            5 => Algorithm::Li2015,
            6 => Algorithm::Ccws,
            7 => Algorithm::I2cws,
            _ => return None,
        })
    }
}

/// One sample of a fingerprint.
///
/// `Pair` codes carry the sampled point `(k*, y)` with `y` in a canonical
/// 64-bit encoding compared bit-exactly; `Index` codes carry only an
/// element (or subelement) id; `Empty` marks a sample where no element
/// survived and deliberately collides with nothing, itself included, so
/// missing samples can only bias similarity down, never up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HashCode {
    Index(u64),
    Pair { element: u64, y_bits: u64 },
    Empty,
}

impl HashCode {
    pub fn pair(element: u64, y: f64) -> Self {
        HashCode::Pair {
            element,
            y_bits: y.to_bits(),
        }
    }

    /// Sampled element id, if any.
    pub fn element(&self) -> Option<u64> {
        match *self {
            HashCode::Index(e) => Some(e),
            HashCode::Pair { element, .. } => Some(element),
            HashCode::Empty => None,
        }
    }

    /// Decoded payload for pair codes.
    pub fn y(&self) -> Option<f64> {
        match *self {
            HashCode::Pair { y_bits, .. } => Some(f64::from_bits(y_bits)),
            _ => None,
        }
    }

    pub fn collides(&self, other: &HashCode) -> bool {
        match (self, other) {
            (HashCode::Empty, _) | (_, HashCode::Empty) => false,
            _ => self == other,
        }
    }
}

/// A length-D sketch of one set, tagged with what produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    algorithm: Algorithm,
    seed: u64,
    codes: Vec<HashCode>,
}

impl Fingerprint {
    pub(crate) fn from_parts(algorithm: Algorithm, seed: u64, codes: Vec<HashCode>) -> Self {
        Self {
            algorithm,
            seed,
            codes,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn d(&self) -> u32 {
        self.codes.len() as u32
    }

    pub fn codes(&self) -> &[HashCode] {
        &self.codes
    }
}

/// Reject nonpositive or non-finite tuning parameters.
pub(crate) fn require_positive_param(name: &'static str, value: f64) -> Result<(), SketchError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(SketchError::InvalidParameter { name, value })
    }
}

/// Entries of a set that must not be empty.
pub(crate) fn nonempty_entries(set: &SparseWeightedSet) -> Result<&[(u64, f64)], SketchError> {
    if set.is_empty() {
        Err(SketchError::EmptySet)
    } else {
        Ok(set.entries())
    }
}

/// Run one sample of `algorithm`.
pub fn sample_once<V: VariateSource>(
    set: &SparseWeightedSet,
    source: &V,
    d: u32,
    algorithm: Algorithm,
) -> Result<HashCode, SketchError> {
    match algorithm {
        Algorithm::MinHash => minhash_binary_sample(set, source, d),
        Algorithm::Wmh { scale } => wmh_quantize_sample(set, source, d, scale),
        Algorithm::Haeupler { scale } => haeupler_sample(set, source, d, scale),
        Algorithm::Gollapudi { w_max } => gollapudi_threshold_sample(set, source, d, w_max),
        Algorithm::Icws => icws_sample(set, source, d),
        Algorithm::Li2015 => li2015_sample(set, source, d),
        Algorithm::Ccws => ccws_sample(set, source, d),
        Algorithm::I2cws => i2cws_sample(set, source, d),
    }
}

/// Sketch `set` into a fingerprint of `scheme.samples()` codes.
pub fn sketch(
    set: &SparseWeightedSet,
    scheme: &VariateScheme,
    algorithm: Algorithm,
) -> Result<Fingerprint, SketchError> {
    let codes = sketch_codes(set, scheme, algorithm)?;
    Ok(Fingerprint::from_parts(
        algorithm,
        scheme.master_seed(),
        codes,
    ))
}

pub(crate) fn sketch_codes<V: VariateSource + SampleBudget>(
    set: &SparseWeightedSet,
    source: &V,
    algorithm: Algorithm,
) -> Result<Vec<HashCode>, SketchError> {
    (0..source.budget())
        .map(|d| sample_once(set, source, d, algorithm))
        .collect()
}

/// Number of samples a source is good for; lets the sketch loop run over
/// pinned test sources as well as production schemes.
pub trait SampleBudget {
    fn budget(&self) -> u32;
}

impl SampleBudget for VariateScheme {
    fn budget(&self) -> u32 {
        self.samples()
    }
}

#[cfg(test)]
impl SampleBudget for crate::variates::PinnedVariates {
    fn budget(&self) -> u32 {
        self.base_samples()
    }
}

/// Iterate a race: keep the strictly smallest statistic, breaking exact
/// ties toward the earliest entry. Entry order is ascending element id
/// everywhere in this crate, so ties resolve to the smallest id
/// deterministically.
pub(crate) struct ArgminRace<T> {
    best: Option<(f64, T)>,
}

impl<T> ArgminRace<T> {
    pub fn new() -> Self {
        Self { best: None }
    }

    pub fn offer(&mut self, statistic: f64, value: T) {
        debug_assert!(!statistic.is_nan(), "race statistic must not be NaN");
        match &self.best {
            Some((s, _)) if *s <= statistic => {}
            _ => self.best = Some((statistic, value)),
        }
    }

    pub fn into_winner(self) -> Option<(f64, T)> {
        self.best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variates::VariateScheme;

    fn set(entries: &[(u64, f64)]) -> SparseWeightedSet {
        SparseWeightedSet::new(0, entries.to_vec()).unwrap()
    }

    #[test]
    fn empty_codes_collide_with_nothing() {
        let a = HashCode::Empty;
        assert!(!a.collides(&HashCode::Empty));
        assert!(!a.collides(&HashCode::Index(3)));
        assert!(!HashCode::Index(3).collides(&a));
    }

    #[test]
    fn pair_codes_collide_only_on_exact_bits() {
        let a = HashCode::pair(4, 0.5);
        assert!(a.collides(&HashCode::pair(4, 0.5)));
        assert!(!a.collides(&HashCode::pair(4, 0.5 + f64::EPSILON)));
        assert!(!a.collides(&HashCode::pair(5, 0.5)));
        assert!(!a.collides(&HashCode::Index(4)));
    }

    #[test]
    fn algorithm_parameters_are_validated() {
        let s = set(&[(1, 1.0)]);
        let scheme = VariateScheme::new(1, 4).unwrap();
        let err = sketch(&s, &scheme, Algorithm::Wmh { scale: 0.0 }).unwrap_err();
        assert_eq!(
            err,
            SketchError::InvalidParameter {
                name: "scale",
                value: 0.0
            }
        );
        assert!(matches!(
            sketch(&s, &scheme, Algorithm::Gollapudi { w_max: -1.0 }),
            Err(SketchError::InvalidParameter { name: "w_max", .. })
        ));
    }

    #[test]
    fn sketch_is_deterministic_and_insertion_order_free() {
        let scheme = VariateScheme::new(42, 16).unwrap();
        let a = SparseWeightedSet::new(0, vec![(1, 0.3), (9, 2.0), (4, 1.1)]).unwrap();
        let b = SparseWeightedSet::new(0, vec![(4, 1.1), (1, 0.3), (9, 2.0)]).unwrap();
        for algo in [
            Algorithm::MinHash,
            Algorithm::Wmh { scale: 10.0 },
            Algorithm::Haeupler { scale: 10.0 },
            Algorithm::Gollapudi { w_max: 2.0 },
            Algorithm::Icws,
            Algorithm::Li2015,
            Algorithm::Ccws,
            Algorithm::I2cws,
        ] {
            let fa = sketch(&a, &scheme, algo).unwrap();
            let fb = sketch(&b, &scheme, algo).unwrap();
            assert_eq!(fa, fb, "{} differs across insertion orders", algo.name());
            assert_eq!(fa.d(), 16);
            assert_eq!(fa.seed(), 42);
            let fa2 = sketch(&a, &scheme, algo).unwrap();
            assert_eq!(fa, fa2, "{} not deterministic", algo.name());
        }
    }

    #[test]
    fn single_sample_fingerprint_has_one_code() {
        let scheme = VariateScheme::new(3, 1).unwrap();
        let fp = sketch(&set(&[(2, 1.0)]), &scheme, Algorithm::I2cws).unwrap();
        assert_eq!(fp.codes().len(), 1);
    }

    #[test]
    fn empty_set_is_rejected_by_every_algorithm() {
        let scheme = VariateScheme::new(1, 2).unwrap();
        let empty = SparseWeightedSet::new(0, vec![]).unwrap();
        for algo in [
            Algorithm::MinHash,
            Algorithm::Wmh { scale: 10.0 },
            Algorithm::Haeupler { scale: 10.0 },
            Algorithm::Gollapudi { w_max: 1.0 },
            Algorithm::Icws,
            Algorithm::Li2015,
            Algorithm::Ccws,
            Algorithm::I2cws,
        ] {
            assert_eq!(
                sketch(&empty, &scheme, algo).unwrap_err(),
                SketchError::EmptySet,
                "{}",
                algo.name()
            );
        }
    }

    #[test]
    fn wire_encoding_round_trips() {
        for algo in [
            Algorithm::MinHash,
            Algorithm::Wmh { scale: 2.5 },
            Algorithm::Haeupler { scale: 10.0 },
            Algorithm::Gollapudi { w_max: 0.75 },
            Algorithm::Icws,
            Algorithm::Li2015,
            Algorithm::Ccws,
            Algorithm::I2cws,
        ] {
            let (tag, param) = algo.wire();
            assert_eq!(Algorithm::from_wire(tag, param), Some(algo));
        }
        assert_eq!(Algorithm::from_wire(99, 0.0), None);
    }

    #[test]
    fn race_breaks_ties_toward_the_first_offer() {
        let mut race = ArgminRace::new();
        race.offer(1.0, "a");
        race.offer(1.0, "b");
        race.offer(2.0, "c");
        assert_eq!(race.into_winner(), Some((1.0, "a")));
    }
}
