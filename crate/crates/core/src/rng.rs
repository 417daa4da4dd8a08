//! Seeded generators. Every random choice in the crate flows from a root
//! seed through [`derive_seed`], so runs are reproducible and independent
//! streams never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for the stream identified by `tags` under `root`.
pub fn derive_seed(root: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(root), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Uniform sample from the closed ball of radius `radius` in `ℝ^d`.
pub fn uniform_in_ball(rng: &mut Rng, d: usize, radius: f64) -> Vec<f64> {
    use rand::Rng as _;
    use rand_distr::StandardNormal;
    let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = crate::kernel::norm(&v);
    let u: f64 = rng.random();
    let scale = radius * u.powf(1.0 / d as f64) / n.max(f64::MIN_POSITIVE);
    v.iter_mut().for_each(|x| *x *= scale);
    v
}
