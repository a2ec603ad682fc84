//! Fuzzy c-means and its partition-index variant (PIM).
//!
//! Memberships are never stored. Each point's membership row is derived from
//! its distances to the current prototypes as
//! `u_k = D_k^(-2/(q-1)) / sum_j D_j^(-2/(q-1))`, which equals the
//! textbook ratio form but costs O(K) per point instead of O(K^2), and is
//! folded straight into the prototype accumulators.

use crate::cluster::Palette;
use crate::samples::{dist2, Samples};

/// Lower bound for the PIM distance term `||x - v|| - alpha`.
pub const PIM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyParams {
    /// Fuzziness exponent, `q > 1`.
    pub q: f64,
    pub iters: usize,
    /// PIM fraction `0 <= delta < 0.5`; `None` runs plain FCM.
    pub delta: Option<f64>,
}

impl Default for FuzzyParams {
    fn default() -> Self {
        Self {
            q: 2.0,
            iters: 10,
            delta: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FuzzyOutcome {
    pub palette: Palette,
    /// Objective at each iteration, evaluated with the memberships induced
    /// by that iteration's prototypes: `J_q` for FCM, `J_q^alpha` for PIM.
    pub objective_history: Vec<f64>,
    /// Prototypes after every iteration.
    pub prototype_history: Vec<Vec<[f64; 3]>>,
    pub distance_evals: u64,
}

/// `alpha = delta * min_{i != j} ||v_i - v_j||^2`, zero for a single prototype.
pub fn pim_alpha(prototypes: &[[f64; 3]], delta: f64) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..prototypes.len() {
        for j in i + 1..prototypes.len() {
            min = min.min(dist2(&prototypes[i], &prototypes[j]));
        }
    }
    if min.is_finite() {
        delta * min
    } else {
        0.0
    }
}

#[inline]
fn inv_pow(d: f64, q: f64) -> f64 {
    if q == 2.0 {
        1.0 / (d * d)
    } else {
        d.powf(-2.0 / (q - 1.0))
    }
}

#[inline]
fn pow_q(u: f64, q: f64) -> f64 {
    if q == 2.0 {
        u * u
    } else {
        u.powf(q)
    }
}

/// Membership row of `x`. `alpha = None` is FCM, where a point coinciding
/// with a prototype belongs to it alone (the lowest such index). With
/// `Some(alpha)` the PIM terms `||x - v|| - alpha` are floored at
/// [`PIM_FLOOR`].
pub fn membership_row(x: &[f64; 3], prototypes: &[[f64; 3]], q: f64, alpha: Option<f64>) -> Vec<f64> {
    let mut row = vec![0.0; prototypes.len()];
    let mut sq = vec![0.0; prototypes.len()];
    fill_memberships(x, prototypes, q, alpha, &mut row, &mut sq);
    row
}

/// Writes the membership row into `row` and squared distances into `sq`.
fn fill_memberships(
    x: &[f64; 3],
    prototypes: &[[f64; 3]],
    q: f64,
    alpha: Option<f64>,
    row: &mut [f64],
    sq: &mut [f64],
) {
    for (s, v) in sq.iter_mut().zip(prototypes) {
        *s = dist2(x, v);
    }
    match alpha {
        None => {
            if let Some(hit) = sq.iter().position(|&s| s == 0.0) {
                row.fill(0.0);
                row[hit] = 1.0;
                return;
            }
            let mut total = 0.0;
            for (u, &s) in row.iter_mut().zip(sq.iter()) {
                *u = inv_pow(s.sqrt(), q);
                total += *u;
            }
            row.iter_mut().for_each(|u| *u /= total);
        }
        Some(alpha) => {
            let mut total = 0.0;
            for (u, &s) in row.iter_mut().zip(sq.iter()) {
                *u = inv_pow((s.sqrt() - alpha).max(PIM_FLOOR), q);
                total += *u;
            }
            row.iter_mut().for_each(|u| *u /= total);
        }
    }
}

/// Alternating membership/prototype updates from `initial` for
/// `params.iters` iterations. Sample weights multiply every `u^q` term.
pub fn fuzzy_cmeans(samples: &Samples, initial: Palette, params: &FuzzyParams) -> FuzzyOutcome {
    let k = initial.len();
    let q = params.q;
    let mut prototypes = initial.into_centers();
    let mut objective_history = Vec::with_capacity(params.iters);
    let mut prototype_history = Vec::with_capacity(params.iters);
    let mut row = vec![0.0; k];
    let mut sq = vec![0.0; k];

    for _ in 0..params.iters {
        let alpha = params.delta.map(|d| pim_alpha(&prototypes, d));
        let mut num = vec![[0.0f64; 3]; k];
        let mut den = vec![0.0f64; k];
        let mut objective = 0.0;
        for (x, &w) in samples.points.iter().zip(&samples.weights) {
            fill_memberships(x, &prototypes, q, alpha, &mut row, &mut sq);
            for j in 0..k {
                let uq = w * pow_q(row[j], q);
                objective += uq * sq[j] - alpha.unwrap_or(0.0) * uq;
                num[j][0] += uq * x[0];
                num[j][1] += uq * x[1];
                num[j][2] += uq * x[2];
                den[j] += uq;
            }
        }
        objective_history.push(objective);
        for j in 0..k {
            if den[j] > 0.0 {
                prototypes[j] = num[j].map(|v| (v / den[j]).clamp(0.0, 255.0));
            }
        }
        prototype_history.push(prototypes.clone());
    }

    FuzzyOutcome {
        palette: Palette::new(prototypes).expect("prototypes are convex combinations of samples"),
        objective_history,
        prototype_history,
        distance_evals: (params.iters * samples.len() * k) as u64,
    }
}

/// `J_q(U, V)` with `U` induced by `prototypes`, evaluated directly from the
/// ratio form of the membership equation. Quadratic in K; meant for checks.
pub fn fcm_objective_direct(samples: &Samples, prototypes: &[[f64; 3]], q: f64) -> f64 {
    let mut j = 0.0;
    for (x, &w) in samples.points.iter().zip(&samples.weights) {
        let d: Vec<f64> = prototypes.iter().map(|v| dist2(x, v).sqrt()).collect();
        // A coincident prototype takes the whole membership at distance 0.
        if d.contains(&0.0) {
            continue;
        }
        for k in 0..d.len() {
            let s: f64 = d.iter().map(|&dj| (d[k] / dj).powf(2.0 / (q - 1.0))).sum();
            let u = 1.0 / s;
            j += w * u.powf(q) * d[k] * d[k];
        }
    }
    j
}
