//! Per-path random streams.
//!
//! Every random draw in the crate comes from `path_rng(master, index)`: a
//! ChaCha8 generator keyed by the master seed, with the path index selecting
//! the 64-bit stream. Streams are independent and addressable, so path `i`
//! sees the same numbers whichever worker thread evaluates it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

/// Generator for path `index` under `master`.
pub fn path_rng(master: u64, index: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}
