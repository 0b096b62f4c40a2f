use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` i.i.d. uniform points `(t, x)` on `[0, time] × [0, length]`.
pub fn sample_collocation(time: f64, length: f64, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.gen::<f64>() * time, rng.gen::<f64>() * length))
        .collect()
}
