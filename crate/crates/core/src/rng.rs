//! Named deterministic RNG streams.
//!
//! All randomness in a run flows from a single root seed. Each phase asks for
//! a stream by name ("whiten", "sz:0:4", "localopt:1", ...) and gets an
//! independent ChaCha8 generator seeded from hash(root seed, name). Adding
//! probes in one phase therefore never perturbs the draws of another, and a
//! run is reproducible from (root seed, stream names) alone.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the root seed bytes and the stream name. Stable across
/// platforms; collisions are harmless here (streams only need to be
/// decorrelated, not cryptographically separated).
fn stream_hash(root: u64, name: &str) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut h = OFFSET;
    for b in root.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Root seed for a run; hands out named sub-streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSplitter {
    root: u64,
}

impl SeedSplitter {
    pub fn new(root: u64) -> Self {
        SeedSplitter { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Deterministic generator for the named stream.
    pub fn stream(&self, name: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(stream_hash(self.root, name))
    }

    /// Seed value for the named stream, for handing to APIs that take a u64.
    pub fn stream_seed(&self, name: &str) -> u64 {
        stream_hash(self.root, name)
    }
}
