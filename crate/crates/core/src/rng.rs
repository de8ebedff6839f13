//! Counter-based seed splitting.
//!
//! Every Monte Carlo trial owns a generator seeded by
//! `derive_trial_seed(master, index)`, so a batch produces the same numbers
//! whether it runs serially or on any number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Generator type used throughout the crate.
pub type TrialRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for trial `trial_index` of a run keyed by `master_seed`.
///
/// For a fixed master the map is a bijection of `u64`: the counter is
/// multiplied by an odd constant, offset by the mixed master, and passed
/// through an invertible finalizer.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    let base = mix64(master_seed ^ 0x6a09_e667_f3bc_c909);
    mix64(base.wrapping_add(trial_index.wrapping_mul(GOLDEN_GAMMA)))
}

/// Generator for a concrete (already derived) seed.
pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the unit sphere of `R^dim` (normalized Gaussian vector).
pub fn uniform_sphere_point<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}
