use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A reproducible random stream.
///
/// Streams are identified by a 64-bit value derived from a master seed and a
/// chain of child ids. Two streams with distinct identities are statistically
/// independent, and the draw sequence of a stream is a pure function of its
/// identity — independent of thread scheduling or of any other stream. This
/// is what makes parallel replications reproducible and lets external
/// simulators regenerate the exact stream an in-process model would see.
#[derive(Debug, Clone)]
pub struct RngStream {
    id: u64,
    rng: ChaCha8Rng,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(parent: u64, child: u64) -> u64 {
    let mut state = parent ^ child.wrapping_mul(GOLDEN | 1);
    let a = splitmix_next(&mut state);
    let b = splitmix_next(&mut state);
    a ^ b.rotate_left(32)
}

impl RngStream {
    /// The stream identified by `(seed, id)`.
    pub fn new(seed: u64, id: u64) -> Self {
        Self::from_raw(mix(splitmix_next(&mut { seed }), id))
    }

    /// Reconstruct a stream from its raw identity. This is the entry point
    /// for external simulators given a per-call seed over the wire.
    pub fn from_raw(raw: u64) -> Self {
        let mut state = raw;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix_next(&mut state).to_le_bytes());
        }
        Self { id: raw, rng: ChaCha8Rng::from_seed(key) }
    }

    /// A child stream, a pure function of `(self, id)` regardless of how many
    /// draws have been consumed from `self`.
    pub fn derive(&self, id: u64) -> Self {
        Self::from_raw(mix(self.id, id))
    }

    /// The stream identity, usable as a wire seed.
    pub fn raw_id(&self) -> u64 {
        self.id
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        rand::Rng::sample(self, rand_distr::StandardNormal)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        rand::Rng::random_range(self, 0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
