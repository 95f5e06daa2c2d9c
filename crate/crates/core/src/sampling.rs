//! Seeded random vectors. Every sampled check draws from here so that a
//! `(seed, stream)` pair fully determines its inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type SampleRng = ChaCha8Rng;

/// Generator for one independent stream under a run seed.
pub fn rng(seed: u64, stream: u64) -> SampleRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn normal_vector(rng: &mut SampleRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Normal vector rescaled to unit Euclidean length.
pub fn unit_vector(rng: &mut SampleRng, n: usize) -> Vec<f64> {
    loop {
        let v = normal_vector(rng, n);
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-12 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// Uniform draws in `[0, 1)`.
pub fn uniform_vector(rng: &mut SampleRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Test vectors used by sampled checks: canonical vectors first, then
/// normal draws, some of them sparse so that prefix and tail effects show.
pub fn probe_vectors(seed: u64, stream: u64, n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count + n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e);
    }
    let mut r = rng(seed, stream);
    for k in 0..count {
        let mut v = normal_vector(&mut r, n);
        if k % 3 == 2 {
            for x in v.iter_mut() {
                if r.random::<f64>() < 0.5 {
                    *x = 0.0;
                }
            }
        }
        out.push(v);
    }
    out
}
