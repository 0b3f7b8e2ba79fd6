//! Deterministic keyed variates.
//!
//! Every sketch algorithm in this crate consumes randomness through a
//! [`VariateSource`]: a pure function from `(element id, sample index,
//! role)` to a draw from a fixed distribution. Keying the randomness —
//! instead of consuming a shared RNG stream — makes fingerprints
//! independent of insertion order, lets two processes sketch the same
//! corpus and compare codes, and lets tests pin individual draws while
//! leaving the rest of the scheme untouched.
//!
//! The concrete [`VariateScheme`] derives each draw from a splitmix64-style
//! finalizer chain over the master seed and the key, so distinct keys give
//! independent-looking streams and the whole scheme is reproducible from a
//! single `u64` seed.

use thiserror::Error;

/// Odd constant with well-spread bits (2^64 / phi), used both as the
/// absorption pad and the per-slot stride of the finalizer chain.
pub(crate) const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

const INV_2_POW_53: f64 = 1.0 / (1u64 << 53) as f64;

/// splitmix64 finalizer: a bijective avalanche mix on `u64`.
///
/// Note `mix64(0) == 0`; callers must pad (see [`absorb`]) rather than
/// feed raw zero-heavy words.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold one word into a running hash state.
pub(crate) fn absorb(state: u64, word: u64) -> u64 {
    mix64(state.wrapping_add(GOLDEN_GAMMA) ^ word)
}

/// Map a raw word to the open interval (0, 1).
///
/// Uses the top 53 bits so the result is an exact multiple of 2^-53; the
/// zero word is nudged to the smallest positive double so downstream
/// logarithms stay finite.
fn unit_open(v: u64) -> f64 {
    let u = (v >> 11) as f64 * INV_2_POW_53;
    if u == 0.0 {
        f64::MIN_POSITIVE
    } else {
        u
    }
}

/// `-ln(u0 * u1)`: a Gamma(2, 1) variate from two independent uniforms.
pub(crate) fn gamma21_from_uniforms(u0: f64, u1: f64) -> f64 {
    -(u0 * u1).ln()
}

/// `exp(-r * b)`.
///
/// When `r = -ln(u)` for a uniform `u`, this is `u^b`; the property suite
/// uses it to study how powers of a shared uniform behave.
pub fn uniform_power(r: f64, b: f64) -> f64 {
    (-r * b).exp()
}

/// Which independent stream of a sample a draw belongs to.
///
/// A single sample index can consume several distinct variates (two
/// gamma rates, two offsets, one race scale, one generic uniform); the
/// role keeps those streams from aliasing each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// First gamma rate of a sample.
    RateA,
    /// Offset paired with [`Role::RateA`].
    OffsetA,
    /// Race scale (gamma) shared by the sample.
    Scale,
    /// Second gamma rate of a sample.
    RateB,
    /// Offset paired with [`Role::RateB`].
    OffsetB,
    /// Generic uniform stream (ranking, activation, inclusion draws).
    Uniform,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::RateA => 0,
            Role::OffsetA => 1,
            Role::Scale => 2,
            Role::RateB => 3,
            Role::OffsetB => 4,
            Role::Uniform => 5,
        }
    }
}

/// Address of a single variate: which element, which of the `D` samples,
/// and which role within that sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VariateKey {
    pub element_id: u64,
    pub sample_index: u32,
    pub role: Role,
}

impl VariateKey {
    pub fn new(element_id: u64, sample_index: u32, role: Role) -> Self {
        Self {
            element_id,
            sample_index,
            role,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VariateError {
    #[error("a variate scheme needs at least one sample slot")]
    NoSamples,
    #[error("sample index {index} out of range for a scheme with {samples} samples")]
    SampleOutOfRange { index: u32, samples: u32 },
}

/// Source of keyed draws. Implementations must be pure: the same key
/// always yields the same value.
pub trait VariateSource {
    /// Uniform draw on the open interval (0, 1).
    fn uniform01(&self, key: VariateKey) -> f64;

    /// Gamma(2, 1) draw (shape 2, unit scale).
    fn gamma21(&self, key: VariateKey) -> f64;

    /// `exp(-r·b)` for the gamma draw `r` at `key_r` and the uniform `b`
    /// at `key_b`. Writing `r = -ln(u_a·u_b)` this is `(u_a·u_b)^b`: a
    /// power of the product of two uniforms, itself marginally
    /// Uniform(0,1). The keys must use distinct roles so `r` and `b` come
    /// from independent streams.
    fn uniform_power(&self, key_r: VariateKey, key_b: VariateKey) -> f64 {
        assert_ne!(
            key_r.role, key_b.role,
            "uniform_power keys must draw from distinct roles"
        );
        uniform_power(self.gamma21(key_r), self.uniform01(key_b))
    }
}

/// The production [`VariateSource`]: a master seed plus a sample budget.
#[derive(Debug, Clone)]
pub struct VariateScheme {
    master_seed: u64,
    samples: u32,
}

impl VariateScheme {
    pub fn new(master_seed: u64, samples: u32) -> Result<Self, VariateError> {
        if samples == 0 {
            return Err(VariateError::NoSamples);
        }
        Ok(Self {
            master_seed,
            samples,
        })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn samples(&self) -> u32 {
        self.samples
    }

    /// Seed of the per-key stream; draws within the stream are indexed
    /// words (see [`Self::word_at`]).
    fn stream(&self, key: VariateKey) -> u64 {
        if key.sample_index >= self.samples {
            panic!(
                "{}",
                VariateError::SampleOutOfRange {
                    index: key.sample_index,
                    samples: self.samples,
                }
            );
        }
        let mut h = absorb(0, self.master_seed);
        h = absorb(h, key.element_id);
        h = absorb(h, (u64::from(key.sample_index) << 3) | key.role.tag());
        h
    }

    fn word_at(stream: u64, slot: u32) -> u64 {
        mix64(stream.wrapping_add(u64::from(slot + 1).wrapping_mul(GOLDEN_GAMMA)))
    }
}

impl VariateSource for VariateScheme {
    fn uniform01(&self, key: VariateKey) -> f64 {
        unit_open(Self::word_at(self.stream(key), 0))
    }

    fn gamma21(&self, key: VariateKey) -> f64 {
        let s = self.stream(key);
        gamma21_from_uniforms(
            unit_open(Self::word_at(s, 0)),
            unit_open(Self::word_at(s, 1)),
        )
    }
}

/// Test double: a real scheme with individual draws overridden.
///
/// Worked-example tests pin the handful of variates a formula consumes
/// and leave every other key on the base scheme, so the code path under
/// test is the production one.
#[cfg(test)]
#[derive(Debug, Clone)]
pub struct PinnedVariates {
    base: VariateScheme,
    pinned: std::collections::HashMap<(u64, u32, Role), f64>,
}

#[cfg(test)]
impl PinnedVariates {
    pub fn new(base: VariateScheme) -> Self {
        Self {
            base,
            pinned: std::collections::HashMap::new(),
        }
    }

    pub fn pin(&mut self, element_id: u64, sample_index: u32, role: Role, value: f64) {
        self.pinned
            .insert((element_id, sample_index, role), value);
    }

    pub fn base_samples(&self) -> u32 {
        self.base.samples()
    }
}

#[cfg(test)]
impl VariateSource for PinnedVariates {
    fn uniform01(&self, key: VariateKey) -> f64 {
        match self
            .pinned
            .get(&(key.element_id, key.sample_index, key.role))
        {
            Some(&v) => v,
            None => self.base.uniform01(key),
        }
    }

    fn gamma21(&self, key: VariateKey) -> f64 {
        match self
            .pinned
            .get(&(key.element_id, key.sample_index, key.role))
        {
            Some(&v) => v,
            None => self.base.gamma21(key),
        }
    }
}
