//! Seed-derived random streams.
//!
//! ChaCha is a counter-based generator: a (seed, stream) pair addresses an
//! independent keystream, so replicate `r` of a study can be generated on
//! any thread, in any order, and still draw the same numbers.

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `index` under `master_seed`.
pub fn stream(master_seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Unit Fréchet variate by inversion, `-1 / ln U` with `U` in (0, 1).
pub fn unit_frechet<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    -1.0 / u.ln()
}
