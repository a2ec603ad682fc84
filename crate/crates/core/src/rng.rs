//! Seeded randomness shared by every randomized quantizer.
//!
//! All runs draw from ChaCha8 seeded with a 64-bit seed, so a `(method,
//! input, K, seed)` tuple reproduces bit-for-bit across machines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type QuantRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> QuantRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `k` distinct indices from `0..n` uniformly without replacement by a
/// partial Fisher-Yates shuffle. The result is in draw order.
pub fn sample_indices(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "cannot draw {k} distinct indices from {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_distinct_and_reproducible() {
        let a = sample_indices(&mut seeded(9), 50, 20);
        let b = sample_indices(&mut seeded(9), 50, 20);
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 20);
        assert!(a.iter().all(|&i| i < 50));
    }

    #[test]
    fn full_draw_is_a_permutation() {
        let mut all = sample_indices(&mut seeded(1), 10, 10);
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }
}
