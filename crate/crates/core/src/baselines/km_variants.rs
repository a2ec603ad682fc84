//! Approximate k-means accelerators: finite-state k-means (FKM) and
//! stable-flags k-means (SKM).

use crate::cluster::{
    assign_naive, lloyd, update_centers, AssignStrategy, LloydOutcome, Palette, Termination,
};
use crate::samples::{dist2, Samples};

/// FKM: after a full first pass, each point searches only the `neighbors`
/// centers nearest to its previous center.
pub fn fkm(samples: &Samples, initial: Palette, neighbors: usize, term: &Termination) -> LloydOutcome {
    lloyd(samples, initial, term, AssignStrategy::FiniteState { neighbors })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkmParams {
    /// Number of initial conventional iterations.
    pub warmup_iters: usize,
    /// Squared-distance movement at or below which a center is stable.
    pub theta: f64,
}

impl Default for SkmParams {
    fn default() -> Self {
        Self {
            warmup_iters: 10,
            theta: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SkmOutcome {
    pub lloyd: LloydOutcome,
    /// Stability flag of each center after the last iteration.
    pub stable: Vec<bool>,
}

/// SKM. The first `warmup_iters` iterations are conventional k-means. From
/// then on a center that moved at most `theta` (squared) in the last update
/// is frozen together with its members: only points of unstable centers are
/// reassigned, only among unstable centers, and only unstable centers are
/// recomputed.
pub fn skm(samples: &Samples, initial: Palette, params: &SkmParams, term: &Termination) -> SkmOutcome {
    let k = initial.len();
    let n = samples.len();
    let mut centers = initial.into_centers();
    let mut memberships = vec![0u32; n];
    let mut point_dist = vec![0.0f64; n];
    let mut stable = vec![false; k];
    let mut sse_history = Vec::new();
    let mut distance_evals = 0u64;

    for iteration in 1.. {
        let palette = Palette::new(centers.clone()).expect("centers stay in range");
        let frozen = iteration > params.warmup_iters;
        if !frozen {
            let stats = assign_naive(samples, &palette, &mut memberships);
            distance_evals += stats.distance_evals;
            for (i, x) in samples.points.iter().enumerate() {
                point_dist[i] = dist2(x, &centers[memberships[i] as usize]);
            }
        } else {
            let active: Vec<usize> = (0..k).filter(|&c| !stable[c]).collect();
            for (i, x) in samples.points.iter().enumerate() {
                if stable[memberships[i] as usize] {
                    continue;
                }
                let mut best = usize::MAX;
                let mut min = f64::INFINITY;
                for &c in &active {
                    let d = dist2(x, &centers[c]);
                    if d < min {
                        min = d;
                        best = c;
                    }
                }
                distance_evals += active.len() as u64;
                memberships[i] = best as u32;
                point_dist[i] = min;
            }
        }
        let sse: f64 = point_dist.iter().zip(&samples.weights).map(|(d, w)| w * d).sum();

        let updated = if frozen {
            update_unstable(samples, &memberships, &centers, &stable)
        } else {
            update_centers(samples, &memberships, k).into_centers()
        };
        for c in 0..k {
            if !(frozen && stable[c]) {
                stable[c] = dist2(&centers[c], &updated[c]) <= params.theta;
            }
        }
        centers = updated;

        let prev = sse_history.last().copied();
        sse_history.push(sse);
        if term.should_stop(iteration, prev, sse) {
            break;
        }
    }

    SkmOutcome {
        lloyd: LloydOutcome {
            palette: Palette::new(centers).expect("centers stay in range"),
            memberships,
            sse_history,
            distance_evals,
        },
        stable,
    }
}

/// Weighted means for centers that are not stable; stable centers keep
/// their position. An empty unstable center is re-seeded at the point of an
/// unstable cluster with the largest weighted squared error to its updated
/// center.
fn update_unstable(
    samples: &Samples,
    memberships: &[u32],
    centers: &[[f64; 3]],
    stable: &[bool],
) -> Vec<[f64; 3]> {
    let k = centers.len();
    let mut sums = vec![[0.0f64; 3]; k];
    let mut mass = vec![0.0f64; k];
    for ((x, &w), &m) in samples.points.iter().zip(&samples.weights).zip(memberships) {
        let m = m as usize;
        if stable[m] {
            continue;
        }
        for c in 0..3 {
            sums[m][c] += w * x[c];
        }
        mass[m] += w;
    }
    let mut out = centers.to_vec();
    let mut empty = Vec::new();
    for c in 0..k {
        if stable[c] {
            continue;
        }
        if mass[c] > 0.0 {
            out[c] = sums[c].map(|v| (v / mass[c]).clamp(0.0, 255.0));
        } else {
            empty.push(c);
        }
    }
    if !empty.is_empty() {
        let mut candidates: Vec<(f64, usize)> = (0..samples.len())
            .filter(|&i| !stable[memberships[i] as usize])
            .map(|i| {
                let m = memberships[i] as usize;
                (samples.weights[i] * dist2(&samples.points[i], &out[m]), i)
            })
            .collect();
        candidates.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut taken: Vec<[f64; 3]> = Vec::new();
        let mut iter = candidates.into_iter().map(|(_, i)| samples.points[i]);
        for c in empty {
            if let Some(p) = iter.by_ref().find(|p| !taken.contains(p)) {
                taken.push(p);
                out[c] = p;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::init_centers;

    fn blobs() -> Samples {
        let mut points = Vec::new();
        for i in 0..400u32 {
            let base = [(i % 4) as f64 * 60.0, (i % 7) as f64 * 30.0, (i % 3) as f64 * 80.0];
            let jitter = ((i * 37) % 11) as f64;
            points.push([base[0] + jitter, base[1] + jitter / 2.0, base[2] + 3.0]);
        }
        let weights = (0..400).map(|i| 1.0 + (i % 5) as f64).collect();
        Samples::new(points, weights)
    }

    #[test]
    fn fkm_with_full_neighborhood_is_kmeans() {
        let s = blobs();
        let init = init_centers(&s, 12, 3).unwrap();
        let term = Termination::fixed(10);
        let a = lloyd(&s, init.clone(), &term, AssignStrategy::Naive);
        let b = fkm(&s, init, 12, &term);
        assert_eq!(a.memberships, b.memberships);
        assert_eq!(a.sse_history, b.sse_history);
    }

    #[test]
    fn skm_warmup_matches_kmeans() {
        let s = blobs();
        let init = init_centers(&s, 10, 8).unwrap();
        let term = Termination::convergent(1e-4);
        let km = lloyd(&s, init.clone(), &term, AssignStrategy::Naive);
        let params = SkmParams { warmup_iters: 4, theta: 1.0 };
        let out = skm(&s, init, &params, &term);
        let n = km.sse_history.len().min(4);
        assert_eq!(&out.lloyd.sse_history[..n], &km.sse_history[..n]);
    }

    #[test]
    fn skm_never_freezing_is_kmeans() {
        let s = blobs();
        let init = init_centers(&s, 9, 1).unwrap();
        let term = Termination::convergent(1e-4);
        let km = lloyd(&s, init.clone(), &term, AssignStrategy::Naive);
        let params = SkmParams { warmup_iters: 1000, theta: 0.0 };
        let out = skm(&s, init, &params, &term);
        assert_eq!(out.lloyd.sse_history, km.sse_history);
        assert_eq!(out.lloyd.palette, km.palette);
    }

    #[test]
    fn skm_coincident_points_converge_immediately() {
        let s = Samples::new(vec![[40.0, 50.0, 60.0]; 5], vec![1.0; 5]);
        let init = Palette::new(vec![[40.0, 50.0, 60.0]]).unwrap();
        let out = skm(&s, init, &SkmParams::default(), &Termination::convergent(1e-4));
        assert_eq!(out.lloyd.iterations(), 1);
        assert_eq!(out.stable, [true]);
    }
}
