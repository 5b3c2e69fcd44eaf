//! Counter-based random number streams.
//!
//! Every ensemble realization consumes randomness from three independent
//! sources: the disorder potential, the initial phases, and the
//! spontaneous-emission schedule. Each source gets its own ChaCha12 stream
//! derived from a single master seed, so
//!
//! - results are bit-reproducible for a given master seed,
//! - realization `r` draws the same numbers no matter how many realizations
//!   run, in what order, or on how many threads, and
//! - changing how many numbers one source consumes never perturbs another
//!   source (no accidental stream sharing).
//!
//! ChaCha12 exposes 2^64 independent streams per key; we map
//! `(realization, source)` pairs injectively onto stream indices and derive
//! the 32-byte key from the master seed with a SplitMix64 chain.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Distinct random sources consumed by one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    /// On-site disorder energies.
    Disorder = 0,
    /// Initial-state phases.
    Phases = 1,
    /// Spontaneous-emission event times and kick angles.
    Emission = 2,
}

/// Number of stream slots reserved per realization (one per [`StreamKind`],
/// plus one spare so the layout can grow without remapping old seeds).
const STREAMS_PER_REALIZATION: u64 = 4;

/// SplitMix64 step; the standard finalizer used to expand small seeds.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Expands a `u64` master seed into a ChaCha key.
fn master_key(master_seed: u64) -> [u8; 32] {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Returns the generator for one `(realization, source)` pair.
pub fn stream(master_seed: u64, realization: u64, kind: StreamKind) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::from_seed(master_key(master_seed));
    rng.set_stream(
        realization
            .checked_mul(STREAMS_PER_REALIZATION)
            .expect("realization index overflows stream space")
            + kind as u64,
    );
    rng
}

/// The three generators consumed by a single realization.
#[derive(Debug, Clone)]
pub struct RealizationStreams {
    pub disorder: ChaCha12Rng,
    pub phases: ChaCha12Rng,
    pub emission: ChaCha12Rng,
}

/// Builds the per-source generators for realization `realization` of the
/// ensemble seeded by `master_seed`.
pub fn realization_streams(master_seed: u64, realization: u64) -> RealizationStreams {
    RealizationStreams {
        disorder: stream(master_seed, realization, StreamKind::Disorder),
        phases: stream(master_seed, realization, StreamKind::Phases),
        emission: stream(master_seed, realization, StreamKind::Emission),
    }
}

/// Uniform draw from `[0, 1)` with exactly 53 random bits, so the value (and
/// everything derived from it) is identical on every platform.
pub fn uniform01(rng: &mut impl RngCore) -> f64 {
    // 2^-53; the top 53 bits of the word become the mantissa.
    (rng.next_u64() >> 11) as f64 * 1.110_223_024_625_156_5e-16
}

/// Uniform draw from `(0, 1]`, safe to pass to `ln`.
pub fn uniform01_open(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * 1.110_223_024_625_156_5e-16
}

/// Uniform draw from `[-half_width, half_width]`.
pub fn uniform_symmetric(rng: &mut impl RngCore, half_width: f64) -> f64 {
    (2.0 * uniform01(rng) - 1.0) * half_width
}

/// Exponentially distributed waiting time with the given rate.
pub fn exponential_gap(rng: &mut impl RngCore, rate: f64) -> f64 {
    -uniform01_open(rng).ln() / rate
}
