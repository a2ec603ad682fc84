//! Modified min-max: greedy maximin center selection under a channel-weighted
//! squared distance, followed by one mean-update pass.

use crate::cluster::Palette;
use crate::error::{Error, Result};
use crate::samples::Samples;

/// Channel weights for red, green and blue.
pub const CHANNEL_WEIGHTS: [f64; 3] = [0.5, 1.0, 0.25];

pub fn weighted_dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    CHANNEL_WEIGHTS[0] * d[0] * d[0] + CHANNEL_WEIGHTS[1] * d[1] * d[1] + CHANNEL_WEIGHTS[2] * d[2] * d[2]
}

/// Sample indices chosen as seeds, starting from `first`: each next seed is
/// the sample whose minimum weighted distance to the chosen seeds is largest
/// (lowest index on ties).
pub fn maximin_seeds(samples: &Samples, first: usize, k: usize) -> Vec<usize> {
    let mut chosen = vec![first];
    let mut min_dist: Vec<f64> = samples
        .points
        .iter()
        .map(|x| weighted_dist2(x, &samples.points[first]))
        .collect();
    while chosen.len() < k {
        let mut next = 0;
        let mut far = f64::NEG_INFINITY;
        for (i, &d) in min_dist.iter().enumerate() {
            if d > far {
                far = d;
                next = i;
            }
        }
        chosen.push(next);
        let c = samples.points[next];
        for (x, d) in samples.points.iter().zip(min_dist.iter_mut()) {
            *d = d.min(weighted_dist2(x, &c));
        }
    }
    chosen
}

/// MMM from a given first seed. Each seed is finally replaced by the
/// frequency-weighted mean of the samples nearest to it.
pub fn mmm_from(samples: &Samples, first: usize, k: usize) -> Result<Palette> {
    if k == 0 || k > samples.len() {
        return Err(Error::KOutOfRange {
            k,
            max: samples.len(),
        });
    }
    let seeds: Vec<[f64; 3]> = maximin_seeds(samples, first, k)
        .into_iter()
        .map(|i| samples.points[i])
        .collect();
    let mut sums = vec![[0.0f64; 3]; k];
    let mut mass = vec![0.0f64; k];
    for (x, &w) in samples.points.iter().zip(&samples.weights) {
        let mut best = 0;
        let mut min = f64::INFINITY;
        for (j, c) in seeds.iter().enumerate() {
            let d = weighted_dist2(x, c);
            if d < min {
                min = d;
                best = j;
            }
        }
        for c in 0..3 {
            sums[best][c] += w * x[c];
        }
        mass[best] += w;
    }
    let centers = seeds
        .iter()
        .zip(sums.iter().zip(&mass))
        .map(|(seed, (s, &m))| {
            if m > 0.0 {
                s.map(|v| (v / m).clamp(0.0, 255.0))
            } else {
                *seed
            }
        })
        .collect();
    Palette::new(centers)
}

/// MMM with the first seed drawn uniformly at random under `seed`.
pub fn mmm(samples: &Samples, k: usize, seed: u64) -> Result<Palette> {
    if samples.is_empty() {
        return Err(Error::KOutOfRange { k, max: 0 });
    }
    let first = crate::rng::sample_indices(&mut crate::rng::seeded(seed), samples.len(), 1)[0];
    mmm_from(samples, first, k)
}
