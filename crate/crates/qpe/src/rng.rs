//! Deterministic random substreams.
//!
//! Every consumer (Alice, Eve, Bob, each round, each trial) owns an
//! independent ChaCha stream derived from the run seed, so transcripts are
//! bit-identical across re-runs and independent of execution order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Domain-separation tags for the protocol actors.
pub const TAG_ALICE: u64 = 0x414c_4943;
pub const TAG_EVE: u64 = 0x4556_45;
pub const TAG_BOB: u64 = 0x424f_42;
pub const TAG_TRIAL: u64 = 0x5452_49;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mix a seed with an index; used to derive per-trial seeds.
pub fn mix(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_add(1)))
}

/// Independent substream for (seed, tag, index).
pub fn substream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed) ^ splitmix64(tag)) ^ splitmix64(index))
}

/// A source of uniform draws on [0,1) that may run dry.
///
/// Production streams never do; finite fakes exercise the exhaustion path.
pub trait UnitStream {
    fn next_unit(&mut self) -> Option<f64>;
}

impl UnitStream for ChaCha8Rng {
    fn next_unit(&mut self) -> Option<f64> {
        Some(self.gen::<f64>())
    }
}

/// Finite stream of pre-baked draws, for tests.
pub struct FiniteStream {
    draws: std::vec::IntoIter<f64>,
}

impl FiniteStream {
    pub fn new(draws: Vec<f64>) -> Self {
        Self { draws: draws.into_iter() }
    }
}

impl UnitStream for FiniteStream {
    fn next_unit(&mut self) -> Option<f64> {
        self.draws.next()
    }
}

/// Standard normal draw via Box-Muller.
pub fn sample_normal(rng: &mut ChaCha8Rng, std_dev: f64) -> f64 {
    if std_dev == 0.0 {
        return 0.0;
    }
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    std_dev * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
