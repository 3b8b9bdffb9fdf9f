use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use lindep_core::SampleTable;

/// Adds independent Gaussian noise with per-channel standard deviation
/// `sigma` to every sample value. The same seed gives the same noise.
pub fn add_gaussian_noise(table: &mut SampleTable, sigma: &[f64], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<Option<Normal<f64>>> = sigma
        .iter()
        .map(|&s| (s > 0.0).then(|| Normal::new(0.0, s).expect("finite positive sigma")))
        .collect();
    for row in &mut table.values {
        for (v, d) in row.iter_mut().zip(&dists) {
            if let Some(d) = d {
                *v += d.sample(&mut rng);
            }
        }
    }
}
