//! Seeded, hierarchically derived randomness.
//!
//! Every consumer of randomness forks its own stream from a `(seed, path)`
//! pair, so runs are reproducible and independent subtrees draw independent
//! noise regardless of evaluation order or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    path: String,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            path: String::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    /// Derives a child stream; identical `(seed, path)` yields identical draws.
    pub fn child(&self, label: &str) -> RngStream {
        let mut path = String::with_capacity(self.path.len() + label.len() + 1);
        path.push_str(&self.path);
        path.push('/');
        path.push_str(label);
        RngStream {
            seed: self.seed,
            path,
        }
    }

    /// A counter-based generator keyed by this stream's identity.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(self.path.as_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha12Rng::from_seed(key)
    }
}
