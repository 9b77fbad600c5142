use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Integer-only random stream addressed by `(seed, label path)`.
///
/// Backed by ChaCha8. The root key for a seed is `ChaCha8Rng::seed_from_u64`'s
/// expanded key; each label step reads 32 bytes from the parent key's stream
/// number `label` to form the child key. Deriving never depends on how many
/// draws the parent has consumed.
#[derive(Clone, Debug)]
pub struct DeterministicRng {
    key: [u8; 32],
    inner: ChaCha8Rng,
}

impl DeterministicRng {
    pub fn from_seed(seed: u64) -> Self {
        let key = ChaCha8Rng::seed_from_u64(seed).get_seed();
        Self::from_key(key)
    }

    fn from_key(key: [u8; 32]) -> Self {
        Self {
            key,
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    /// Child stream for `label`.
    pub fn derive(&self, label: u64) -> Self {
        let mut g = ChaCha8Rng::from_seed(self.key);
        g.set_stream(label);
        let mut key = [0u8; 32];
        g.fill_bytes(&mut key);
        Self::from_key(key)
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n` by rejection sampling. `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Stream for `seed` followed by each label in `labels`. The empty path is the
/// root stream.
pub fn rng_derive(seed: u64, labels: &[u64]) -> DeterministicRng {
    labels
        .iter()
        .fold(DeterministicRng::from_seed(seed), |rng, &l| rng.derive(l))
}
