//! Keyed deterministic random streams.
//!
//! Every random draw in the engine comes from a ChaCha8 stream keyed by
//! `(master, tag, a, b)`. Keying by purpose rather than by draw order is
//! what makes the sequential / round-sequential / parallel drivers
//! coupled run-for-run: the seed used to resample event `id` in round `t`
//! is a pure function of the master seed, independent of which other
//! events were resampled or how many worker threads were used.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Initial state sampling.
pub const TAG_INIT: u64 = 1;
/// Per-(round, event) resampling seed used by the round drivers.
pub const TAG_ROUND_SEED: u64 = 2;
/// Per-round random ordering of the violated set.
pub const TAG_ROUND_ORDER: u64 = 3;
/// Per-step stream for the fully sequential driver.
pub const TAG_SEQ_STEP: u64 = 4;
/// Free tag for tests and benchmarks.
pub const TAG_MISC: u64 = 99;

/// Returns the stream keyed by `(master, tag, a, b)`.
pub fn stream(master: u64, tag: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..32].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
