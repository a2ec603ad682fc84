//! Batch k-means over weighted samples.
//!
//! [`run_km_full`] is conventional k-means over every pixel; [`run_wsm`] runs
//! over the unique colors of an image with frequency weights and replaces the
//! exhaustive nearest-center scan by the sort-means scan from
//! [`assign_sort_means`]. Both share one Lloyd driver, [`lloyd`].

mod assign;
mod lloyd;

use std::time::Duration;

pub use assign::{assign_naive, assign_sort_means, audit_sort_means, AssignStats};
pub use lloyd::{
    init_centers, init_centers_from_pixels, lloyd, lloyd_observed, run_km_full, run_km_full_from, run_wsm,
    run_wsm_from, update_centers, weighted_sse, AssignStrategy, IterationView, LloydOutcome,
};

use crate::error::{Error, Result};
use crate::imageio::RgbColor;
use crate::samples::dist2;

/// Cluster centers in real-valued RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    centers: Vec<[f64; 3]>,
}

impl Palette {
    pub fn new(centers: Vec<[f64; 3]>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::EmptyPalette);
        }
        for c in &centers {
            if c.iter().any(|v| !v.is_finite() || !(0.0..=255.0).contains(v)) {
                return Err(Error::InvalidPalette(format!(
                    "center {c:?} is outside [0, 255]^3"
                )));
            }
        }
        Ok(Self { centers })
    }

    pub fn from_colors(colors: &[RgbColor]) -> Result<Self> {
        Self::new(colors.iter().map(|c| c.to_f64()).collect())
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[[f64; 3]] {
        &self.centers
    }

    pub fn into_centers(self) -> Vec<[f64; 3]> {
        self.centers
    }

    /// Centers rounded to the nearest 8-bit color.
    pub fn rounded(&self) -> Vec<RgbColor> {
        self.centers
            .iter()
            .map(|&c| RgbColor::from_f64_rounded(c))
            .collect()
    }

    /// Index of the nearest center, lowest index on ties.
    pub fn nearest(&self, x: &[f64; 3]) -> (usize, f64) {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (k, c) in self.centers.iter().enumerate() {
            let d = dist2(x, c);
            if d < best_dist {
                best_dist = d;
                best = k;
            }
        }
        (best, best_dist)
    }
}

/// Sort-means working set: memberships plus the inter-center distance matrix
/// `d` and the order matrix `M` whose row `i` lists every center by
/// nondecreasing distance from center `i`, starting with `i` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub memberships: Vec<u32>,
    k: usize,
    center_dists: Vec<f64>,
    sorted_order: Vec<u32>,
    /// `sorted_dists[i * k + r]` is the distance from `i` to `order_row(i)[r]`.
    sorted_dists: Vec<f64>,
}

impl ClusterState {
    pub fn new(memberships: Vec<u32>) -> Self {
        Self {
            memberships,
            k: 0,
            center_dists: Vec::new(),
            sorted_order: Vec::new(),
            sorted_dists: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Squared distance between centers `i` and `j` as of the last refresh.
    pub fn center_dist(&self, i: usize, j: usize) -> f64 {
        self.center_dists[i * self.k + j]
    }

    /// Row `i` of the order matrix.
    pub fn sorted_dist_row(&self, i: usize) -> &[f64] {
        &self.sorted_dists[i * self.k..(i + 1) * self.k]
    }

    pub fn order_row(&self, i: usize) -> &[u32] {
        &self.sorted_order[i * self.k..(i + 1) * self.k]
    }

    /// Recomputes `d` and `M` for `palette`. Ties within a row are ordered
    /// by center index, except that the row owner always comes first.
    pub fn refresh(&mut self, palette: &Palette) {
        let k = palette.len();
        let centers = palette.centers();
        self.k = k;
        self.center_dists.clear();
        self.center_dists.resize(k * k, 0.0);
        for i in 0..k {
            for j in i + 1..k {
                let d = dist2(&centers[i], &centers[j]);
                self.center_dists[i * k + j] = d;
                self.center_dists[j * k + i] = d;
            }
        }
        self.sorted_order.clear();
        self.sorted_order.reserve(k * k);
        self.sorted_dists.clear();
        self.sorted_dists.reserve(k * k);
        // Bit patterns of non-negative floats sort like the floats, so a
        // plain key sort orders by distance, then index.
        let mut row: Vec<(u64, u32)> = Vec::with_capacity(k);
        for i in 0..k {
            let dists = &self.center_dists[i * k..(i + 1) * k];
            row.clear();
            row.extend(
                (0..k as u32)
                    .filter(|&j| j as usize != i)
                    .map(|j| (dists[j as usize].to_bits(), j)),
            );
            row.sort_unstable();
            self.sorted_order.push(i as u32);
            self.sorted_dists.push(0.0);
            for &(bits, j) in &row {
                self.sorted_order.push(j);
                self.sorted_dists.push(f64::from_bits(bits));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationMode {
    /// Exactly `max_iters` assignment passes.
    Fixed,
    /// Stop once `(SSE_prev - SSE) / SSE <= epsilon`, or at `max_iters`.
    Convergent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination {
    pub mode: TerminationMode,
    pub max_iters: usize,
    pub epsilon: f64,
}

impl Termination {
    pub const DEFAULT_ITERS: usize = 10;
    pub const DEFAULT_EPSILON: f64 = 1e-4;
    /// Hard cap on convergent runs.
    pub const CONVERGENT_CAP: usize = 1000;

    pub fn fixed(max_iters: usize) -> Self {
        Self {
            mode: TerminationMode::Fixed,
            max_iters,
            epsilon: Self::DEFAULT_EPSILON,
        }
    }

    pub fn convergent(epsilon: f64) -> Self {
        Self {
            mode: TerminationMode::Convergent,
            max_iters: Self::CONVERGENT_CAP,
            epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if self.mode == TerminationMode::Convergent && (self.epsilon.is_nan() || self.epsilon <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive in convergent mode, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Whether the run stops after iteration `iteration` (1-based) given the
    /// SSE of the previous and current assignment passes.
    pub fn should_stop(&self, iteration: usize, prev_sse: Option<f64>, sse: f64) -> bool {
        if iteration >= self.max_iters {
            return true;
        }
        match self.mode {
            TerminationMode::Fixed => false,
            TerminationMode::Convergent => {
                if sse <= 0.0 {
                    return true;
                }
                prev_sse.is_some_and(|prev| (prev - sse) / sse <= self.epsilon)
            }
        }
    }
}

impl Default for Termination {
    fn default() -> Self {
        Self::fixed(Self::DEFAULT_ITERS)
    }
}

/// Outcome of one palette-generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub method: String,
    pub k: usize,
    pub seed: u64,
    pub iterations: usize,
    /// Objective value after each assignment pass (weighted SSE for the
    /// k-means family, `J_q` for the fuzzy methods). Empty for one-pass
    /// methods.
    pub sse_history: Vec<f64>,
    pub sse: f64,
    /// Point-to-center distance evaluations.
    pub distance_evals: u64,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn new(method: impl Into<String>, k: usize, seed: u64) -> Self {
        Self {
            method: method.into(),
            k,
            seed,
            iterations: 0,
            sse_history: Vec::new(),
            sse: f64::NAN,
            distance_evals: 0,
            elapsed: Duration::ZERO,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_validation() {
        assert!(Palette::new(vec![]).is_err());
        assert!(Palette::new(vec![[0.0, 256.0, 0.0]]).is_err());
        assert!(Palette::new(vec![[f64::NAN, 0.0, 0.0]]).is_err());
        let p = Palette::new(vec![[0.4, 0.5, 254.6]]).unwrap();
        assert_eq!(p.rounded(), vec![RgbColor::new(0, 1, 255)]);
    }

    #[test]
    fn refresh_builds_sorted_rows() {
        let p = Palette::new(vec![[0.0; 3], [10.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0; 3]]).unwrap();
        let mut s = ClusterState::new(vec![]);
        s.refresh(&p);
        assert_eq!(s.order_row(0), &[0, 3, 2, 1]);
        // Center 3 coincides with center 0 but still leads its own row.
        assert_eq!(s.order_row(3), &[3, 0, 2, 1]);
        assert_eq!(s.order_row(1), &[1, 2, 0, 3]);
        assert_eq!(s.sorted_dist_row(1), &[0.0, 49.0, 100.0, 100.0]);
        assert_eq!(s.center_dist(1, 2), 49.0);
        assert_eq!(s.center_dist(2, 1), 49.0);
        assert_eq!(s.center_dist(2, 2), 0.0);
    }

    #[test]
    fn termination_rules() {
        let fixed = Termination::fixed(3);
        assert!(!fixed.should_stop(2, Some(10.0), 10.0));
        assert!(fixed.should_stop(3, Some(10.0), 9.0));

        let conv = Termination::convergent(1e-4);
        assert!(!conv.should_stop(1, None, 10.0));
        assert!(conv.should_stop(1, None, 0.0));
        assert!(!conv.should_stop(2, Some(10.01), 10.0));
        assert!(conv.should_stop(2, Some(10.0005), 10.0));
        assert!(conv.should_stop(Termination::CONVERGENT_CAP, Some(20.0), 10.0));

        assert!(Termination::convergent(0.0).validate().is_err());
        assert!(Termination::fixed(0).validate().is_err());
        assert!(Termination::default().validate().is_ok());
    }
}
