//! Seeded samplers for balls and spheres. All Monte-Carlo procedures draw
//! their samples sequentially from a `ChaCha8Rng` so results do not depend
//! on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the Euclidean unit sphere in `R^dim`.
pub fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    if dim == 0 {
        return Vec::new();
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

/// Uniform point in the closed Euclidean ball of the given radius.
pub fn uniform_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    if dim == 0 {
        return Vec::new();
    }
    let dir = unit_sphere(rng, dim);
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / dim as f64);
    dir.into_iter().map(|a| a * r).collect()
}

/// Uniform point in the open ball, kept a relative distance `margin` away from the sphere.
pub fn interior_ball<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    radius: f64,
    margin: f64,
) -> Vec<f64> {
    uniform_ball(rng, dim, radius * (1.0 - margin))
}
