//! Deterministic random substreams.
//!
//! Every stream is a ChaCha8 generator keyed from `(seed, sample, slot)` by
//! SplitMix64 mixing. ChaCha output is specified word-for-word, and the float
//! conversions below use only integer shifts and one exact multiplication, so
//! a given key produces the same draws on every platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Slot used for draws shared by a whole sample (the network power factor).
pub const NETWORK_SLOT: u64 = u64::MAX;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Stream for load `slot` of sample `sample` under `seed`.
    pub fn substream(seed: u64, sample: u64, slot: u64) -> Self {
        let mut state = seed;
        let _ = splitmix64(&mut state);
        state ^= sample.wrapping_mul(GOLDEN);
        let _ = splitmix64(&mut state);
        state ^= slot.wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        RngStream { inner: ChaCha8Rng::from_seed(key) }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::substream(seed, 0, 0)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_keys_identical_streams() {
        let mut a = RngStream::substream(42, 7, 3);
        let mut b = RngStream::substream(42, 7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn neighbouring_keys_differ() {
        let first = |s, i, j| RngStream::substream(s, i, j).next_u64();
        let base = first(1, 0, 0);
        assert_ne!(base, first(2, 0, 0));
        assert_ne!(base, first(1, 1, 0));
        assert_ne!(base, first(1, 0, 1));
        assert_ne!(first(1, 0, 1), first(1, 1, 0));
    }

    #[test]
    fn frozen_first_draws() {
        // Pins the documented key derivation; a change here breaks every
        // previously generated sample.
        let mut r = RngStream::substream(42, 0, 0);
        assert_eq!(r.next_u64(), 0xc195_4933_a42d_df90);
        assert_eq!(r.next_u64(), 0x03cd_4d96_1934_0fe5);
    }

    #[test]
    fn open_uniform_never_hits_bounds() {
        let mut r = RngStream::from_seed(9);
        for _ in 0..10_000 {
            let u = r.uniform_open();
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
