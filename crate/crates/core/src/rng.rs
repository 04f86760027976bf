//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by the
//! user seed, with the ChaCha stream id selecting an independent sub-stream.
//! Stream ids are fixed per consumer, so results do not depend on thread
//! scheduling:
//!
//! | consumer                               | stream id                    |
//! |----------------------------------------|------------------------------|
//! | fern `k` of a multi-label/single model | `k`                          |
//! | fern `k` of battery class `c`          | `(c + 1) << 32 \| k`         |
//! | balanced subsample of battery class `c`| `(c + 1) << 32 \| 0xFFFF_FFFF`|
//! | synthesized training example `i`       | `i`                          |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn fern_stream(k: usize) -> u64 {
    k as u64
}

pub(crate) fn battery_fern_stream(class: usize, k: usize) -> u64 {
    ((class as u64 + 1) << 32) | k as u64
}

pub(crate) fn battery_subsample_stream(class: usize) -> u64 {
    ((class as u64 + 1) << 32) | 0xFFFF_FFFF
}
