//! Seeded pseudorandom streams.
//!
//! Every stochastic operation takes an explicit [`RngStream`]. Evaluation
//! streams are derived from `(run seed, generation, individual index)` so a
//! parallel schedule draws exactly what a serial one would.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RngStream = ChaCha8Rng;

const EVALUATION_SALT: u64 = 0x5eed_e7a1_0a7e_0001;

pub fn stream_from_seed(seed: u64) -> RngStream {
    RngStream::seed_from_u64(seed)
}

/// Independent stream for evaluating individual `index` in `generation`.
pub fn evaluation_stream(run_seed: u64, generation: usize, index: usize) -> RngStream {
    let mut rng = RngStream::seed_from_u64(run_seed ^ EVALUATION_SALT);
    rng.set_stream(((generation as u64) << 32) | (index as u64 & 0xffff_ffff));
    rng
}

/// Draws a seed from operating-system entropy.
pub fn entropy_seed() -> u64 {
    rand::random()
}
