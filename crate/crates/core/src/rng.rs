//! Deterministic random streams.
//!
//! Every trial owns a 64-bit seed. Independent pieces of a trial (the channel,
//! each training frame, the receiver noise) draw from separate ChaCha streams
//! keyed by that seed, so a quantity never depends on how many other
//! quantities were drawn before it. Frame `m` is the same whether a run uses
//! 10 or 100 frames, and the unit-variance noise is shared by every SNR and
//! ADC setting evaluated on the same trial.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

const CHANNEL_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const FRAME_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Channel,
    Noise,
    Frame(usize),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Channel => CHANNEL_STREAM,
            Stream::Noise => NOISE_STREAM,
            Stream::Frame(m) => FRAME_STREAM_BASE + m as u64,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}

/// Seed of trial `index` in a sweep started from `base_seed`.
pub fn trial_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Circularly-symmetric complex Gaussian with the given variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}
