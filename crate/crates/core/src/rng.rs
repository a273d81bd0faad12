//! Seeded random streams.
//!
//! Every independent unit of work (an orbit, a return-time sample, a worker)
//! gets its own ChaCha stream under the run seed, so results do not depend on
//! how the work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
