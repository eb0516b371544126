//! Seeded random streams.
//!
//! Every randomized operation draws from its own ChaCha8 stream derived from
//! the user seed, so results are portable across platforms and independent
//! of the order in which operations run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers, one per randomized operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Split = 1,
    CrossValidation = 2,
    KMeansInit = 3,
    FarthestFirst = 4,
    Generator = 5,
    Cobweb = 6,
    EmFolds = 7,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
