//! Seeded random streams.
//!
//! Every randomized routine takes an explicit stream. Parallel sweeps derive
//! one stream per task from `(master seed, task index)`, so results do not
//! depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// The stream for task `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A uniformly random unit vector (normalized Gaussian).
pub fn unit_vector<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> crate::Point {
    use rand_distr::StandardNormal;
    loop {
        let p: crate::Point = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if let Some(u) = p.normalized() {
            return u;
        }
    }
}

/// A uniformly random unit vector orthogonal to the unit vector `beta`.
pub fn equatorial_unit<R: rand::Rng + ?Sized>(rng: &mut R, beta: &[f64]) -> crate::Point {
    loop {
        let mut p = unit_vector(rng, beta.len());
        let s = crate::point::dot(&p, beta);
        crate::point::axpy(-s, beta, &mut p);
        if let Some(u) = p.normalized() {
            return u;
        }
    }
}
