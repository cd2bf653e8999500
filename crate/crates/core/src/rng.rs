//! Counter-based random streams.
//!
//! Every sampling cell derives its own key from `(seed, input id, i, j, m)` and
//! the draw index is the counter, so the numbers a cell sees do not depend on
//! which thread runs it or in what order cells are scheduled.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a; stable across platforms and toolchains, unlike `DefaultHasher`.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

/// Folds a sequence of words into one stream key.
pub fn derive_key(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED_0F1A_7E00_u64, |acc, &p| mix64(acc ^ mix64(p.wrapping_add(GOLDEN))))
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    pub fn from_parts(parts: &[u64]) -> Self {
        Self::new(derive_key(parts))
    }

    /// Output for an explicit counter value, without advancing.
    #[inline]
    pub fn at(&self, counter: u64) -> u64 {
        mix64(self.key ^ mix64(counter.wrapping_mul(GOLDEN).wrapping_add(self.key)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = self.at(self.counter);
        self.counter += 1;
        out
    }

    /// Uniform in `[0, 1)` with 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` by Lemire's multiply-and-reject.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = self.next_u64() as u128 * bound as u128;
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform `k`-subset of `{0, .., universe-1}` as a bitmask (Floyd's algorithm).
    pub fn subset(&mut self, universe: usize, k: usize) -> u64 {
        assert!(k <= universe && universe <= 64);
        let mut chosen = 0u64;
        for top in universe - k..universe {
            let t = self.below(top as u64 + 1) as usize;
            if chosen >> t & 1 == 1 {
                chosen |= 1 << top;
            } else {
                chosen |= 1 << t;
            }
        }
        chosen
    }
}
