//! Deterministic, splittable random streams.
//!
//! A stream is identified by `(root seed, domain, index)`. The ChaCha8 key is
//! `SplitMix64(root ^ SplitMix64(domain))` expanded with `seed_from_u64`, and
//! `index` selects the ChaCha stream (nonce). Work split into fixed chunks with
//! one stream per chunk is therefore independent of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used by every Monte Carlo routine.
pub type StreamRng = ChaCha8Rng;

/// One step of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a short ASCII label into a domain tag.
pub fn domain_tag(label: &str) -> u64 {
    label
        .bytes()
        .fold(0xCBF2_9CE4_8422_2325_u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01B3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    root: u64,
}

impl StreamFactory {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Derives a child factory, used to give each sweep point its own seed space.
    pub fn child(&self, domain: u64) -> Self {
        Self {
            root: splitmix64(self.root ^ splitmix64(domain)),
        }
    }

    pub fn stream(&self, domain: u64, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.root ^ splitmix64(domain)));
        rng.set_stream(index);
        rng
    }
}
