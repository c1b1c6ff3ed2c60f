//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream identified by
//! `(seed, purpose, replica)`: the seed and purpose select the key and the
//! replica id selects the 64-bit stream number. ChaCha is counter-based, so
//! the `i`-th draw of a stream depends only on its position, never on which
//! thread produced the other replicas.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent uses of randomness within one replica.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Bernoulli perturbation fields.
    Bernoulli,
    /// Ising Monte Carlo dynamics.
    Ising,
    /// Auxiliary draws made by tests and diagnostics.
    Auxiliary,
}

impl Purpose {
    fn salt(self) -> u64 {
        match self {
            Purpose::Bernoulli => 0x6265_726e_6f75_6c6c,
            Purpose::Ising => 0x6973_696e_675f_6d63,
            Purpose::Auxiliary => 0x6175_7869_6c69_6172,
        }
    }
}

/// SplitMix64 finalizer, used to spread `(seed, purpose)` into a key.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The stream for `(seed, purpose, replica)`.
pub fn stream(seed: u64, purpose: Purpose, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ purpose.salt()));
    rng.set_stream(replica);
    rng
}
