use std::collections::HashSet;
use std::time::Instant;

use rand::Rng;

use super::{assign_naive, assign_sort_means, ClusterState, Palette, RunReport, Termination, TerminationMode};
use crate::error::{Error, Result};
use crate::histogram::ColorHistogram;
use crate::imageio::RgbImage;
use crate::rng;
use crate::samples::{dist2, Samples};

/// Picks `k` distinct samples uniformly without replacement as initial centers.
pub fn init_centers(samples: &Samples, k: usize, seed: u64) -> Result<Palette> {
    if k == 0 || k > samples.len() {
        return Err(Error::KOutOfRange {
            k,
            max: samples.len(),
        });
    }
    let picks = rng::sample_indices(&mut rng::seeded(seed), samples.len(), k);
    Palette::new(picks.into_iter().map(|i| samples.points[i]).collect())
}

/// Picks `k` random pixels with pairwise distinct colors. Pixels are drawn
/// by a lazy Fisher-Yates shuffle; repeats of an already chosen color are
/// passed over.
pub fn init_centers_from_pixels(image: &RgbImage, k: usize, seed: u64) -> Result<Palette> {
    let pixels = image.pixels();
    if k == 0 {
        return Err(Error::KOutOfRange { k, max: 0 });
    }
    let mut rng = rng::seeded(seed);
    let mut order: Vec<u32> = (0..pixels.len() as u32).collect();
    let mut chosen = Vec::with_capacity(k);
    let mut seen = HashSet::with_capacity(k);
    for i in 0..order.len() {
        let j = rng.random_range(i..order.len());
        order.swap(i, j);
        let color = pixels[order[i] as usize];
        if seen.insert(color) {
            chosen.push(color.to_f64());
            if chosen.len() == k {
                return Palette::new(chosen);
            }
        }
    }
    Err(Error::KOutOfRange {
        k,
        max: chosen.len(),
    })
}

/// Weighted SSE `sum w_i ||x_i - c_{m[i]}||^2`.
pub fn weighted_sse(samples: &Samples, palette: &Palette, memberships: &[u32]) -> f64 {
    let centers = palette.centers();
    samples
        .points
        .iter()
        .zip(&samples.weights)
        .zip(memberships)
        .map(|((x, w), &m)| w * dist2(x, &centers[m as usize]))
        .sum()
}

/// Moves every center to the weighted mean of its members.
///
/// A center left without members is re-seeded at the sample contributing
/// the most weighted squared error to its (updated) center. With several
/// empty clusters the next-largest contributors are used, skipping samples
/// that coincide with an already chosen one.
pub fn update_centers(samples: &Samples, memberships: &[u32], k: usize) -> Palette {
    let mut sums = vec![[0.0f64; 3]; k];
    let mut mass = vec![0.0f64; k];
    for ((x, &w), &m) in samples.points.iter().zip(&samples.weights).zip(memberships) {
        let s = &mut sums[m as usize];
        s[0] += w * x[0];
        s[1] += w * x[1];
        s[2] += w * x[2];
        mass[m as usize] += w;
    }
    let mut centers: Vec<[f64; 3]> = sums
        .iter()
        .zip(&mass)
        .map(|(s, &w)| {
            if w > 0.0 {
                s.map(|v| (v / w).clamp(0.0, 255.0))
            } else {
                [f64::NAN; 3]
            }
        })
        .collect();

    let empty: Vec<usize> = (0..k).filter(|&c| mass[c] <= 0.0).collect();
    if !empty.is_empty() {
        let mut contrib: Vec<(f64, usize)> = samples
            .points
            .iter()
            .zip(&samples.weights)
            .zip(memberships)
            .enumerate()
            .map(|(i, ((x, w), &m))| (w * dist2(x, &centers[m as usize]), i))
            .collect();
        contrib.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut taken: Vec<[f64; 3]> = Vec::with_capacity(empty.len());
        let mut candidates = contrib.into_iter().map(|(_, i)| samples.points[i]);
        for &c in &empty {
            let point = candidates
                .by_ref()
                .find(|p| !taken.contains(p))
                .expect("fewer distinct samples than clusters");
            taken.push(point);
            centers[c] = point;
        }
    }
    Palette::new(centers).expect("weighted means of in-range samples stay in range")
}

/// How each iteration after the first finds nearest centers. The first
/// iteration is always an exhaustive pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignStrategy {
    Naive,
    SortMeans,
    /// Search only the `neighbors` centers nearest to the previous center.
    FiniteState { neighbors: usize },
}

/// Snapshot handed to the [`lloyd_observed`] callback after each iteration.
pub struct IterationView<'a> {
    pub iteration: usize,
    pub memberships: &'a [u32],
    /// Centers used by this iteration's assignment pass.
    pub assigned_to: &'a Palette,
    /// Centers after this iteration's update.
    pub updated: &'a Palette,
    pub sse: f64,
}

#[derive(Debug, Clone)]
pub struct LloydOutcome {
    pub palette: Palette,
    pub memberships: Vec<u32>,
    pub sse_history: Vec<f64>,
    pub distance_evals: u64,
}

impl LloydOutcome {
    pub fn iterations(&self) -> usize {
        self.sse_history.len()
    }
}

pub fn lloyd(
    samples: &Samples,
    initial: Palette,
    term: &Termination,
    strategy: AssignStrategy,
) -> LloydOutcome {
    lloyd_observed(samples, initial, term, strategy, |_| {})
}

/// Batch k-means from `initial`, calling `observe` after every iteration.
pub fn lloyd_observed(
    samples: &Samples,
    initial: Palette,
    term: &Termination,
    strategy: AssignStrategy,
    mut observe: impl FnMut(&IterationView<'_>),
) -> LloydOutcome {
    let k = initial.len();
    let mut palette = initial;
    let mut state = ClusterState::new(vec![0; samples.len()]);
    let mut sse_history = Vec::new();
    let mut distance_evals = 0u64;

    for iteration in 1.. {
        let stats = if iteration == 1 || strategy == AssignStrategy::Naive {
            assign_naive(samples, &palette, &mut state.memberships)
        } else {
            match strategy {
                AssignStrategy::SortMeans => assign_sort_means(samples, &palette, &mut state),
                AssignStrategy::FiniteState { neighbors } => {
                    assign_finite_state(samples, &palette, &mut state, neighbors)
                }
                AssignStrategy::Naive => unreachable!(),
            }
        };
        distance_evals += stats.distance_evals;
        let updated = update_centers(samples, &state.memberships, k);
        observe(&IterationView {
            iteration,
            memberships: &state.memberships,
            assigned_to: &palette,
            updated: &updated,
            sse: stats.sse,
        });
        let prev = sse_history.last().copied();
        sse_history.push(stats.sse);
        palette = updated;
        if term.should_stop(iteration, prev, stats.sse) {
            break;
        }
    }

    LloydOutcome {
        palette,
        memberships: state.memberships,
        sse_history,
        distance_evals,
    }
}

/// Finite-state assignment: each point only considers the `neighbors`
/// centers nearest to its previous center (the previous center included).
pub(crate) fn assign_finite_state(
    samples: &Samples,
    palette: &Palette,
    state: &mut ClusterState,
    neighbors: usize,
) -> super::AssignStats {
    state.refresh(palette);
    let centers = palette.centers();
    let span = neighbors.clamp(1, palette.len());
    let mut sse = 0.0;
    for (i, x) in samples.points.iter().enumerate() {
        let p = state.memberships[i] as usize;
        let mut best = usize::MAX;
        let mut min = f64::INFINITY;
        for &t in &state.order_row(p)[..span] {
            let t = t as usize;
            let d = dist2(x, &centers[t]);
            if d < min || (d == min && t < best) {
                min = d;
                best = t;
            }
        }
        state.memberships[i] = best as u32;
        sse += samples.weights[i] * min;
    }
    super::AssignStats {
        distance_evals: (samples.len() * span) as u64,
        sse,
        skip_violations: 0,
    }
}

fn report_from(method: &str, k: usize, seed: u64, outcome: &LloydOutcome, started: Instant) -> RunReport {
    RunReport {
        method: method.to_string(),
        k,
        seed,
        iterations: outcome.iterations(),
        sse_history: outcome.sse_history.clone(),
        sse: outcome.sse_history.last().copied().unwrap_or(f64::NAN),
        distance_evals: outcome.distance_evals,
        elapsed: started.elapsed(),
    }
}

fn suffixed(base: &str, term: &Termination) -> String {
    match term.mode {
        TerminationMode::Fixed => base.to_string(),
        TerminationMode::Convergent => format!("{base}-c"),
    }
}

/// Weighted sort-means over the unique colors of `hist`, initialized from
/// `k` random distinct colors.
pub fn run_wsm(
    hist: &ColorHistogram,
    k: usize,
    term: &Termination,
    seed: u64,
) -> Result<(Palette, RunReport)> {
    term.validate()?;
    let started = Instant::now();
    let samples = Samples::from_histogram(hist);
    let initial = init_centers(&samples, k, seed)?;
    let outcome = lloyd(&samples, initial, term, AssignStrategy::SortMeans);
    let report = report_from(&suffixed("wsm", term), k, seed, &outcome, started);
    Ok((outcome.palette, report))
}

/// [`run_wsm`] from caller-supplied initial centers.
pub fn run_wsm_from(
    hist: &ColorHistogram,
    initial: Palette,
    term: &Termination,
) -> Result<(Palette, RunReport)> {
    term.validate()?;
    let started = Instant::now();
    let k = initial.len();
    let samples = Samples::from_histogram(hist);
    let outcome = lloyd(&samples, initial, term, AssignStrategy::SortMeans);
    let report = report_from(&suffixed("wsm", term), k, 0, &outcome, started);
    Ok((outcome.palette, report))
}

/// Conventional k-means over every pixel, initialized from `k` random pixels
/// of distinct colors.
pub fn run_km_full(
    image: &RgbImage,
    k: usize,
    term: &Termination,
    seed: u64,
) -> Result<(Palette, RunReport)> {
    term.validate()?;
    let started = Instant::now();
    let initial = init_centers_from_pixels(image, k, seed)?;
    let samples = Samples::from_pixels(image);
    let outcome = lloyd(&samples, initial, term, AssignStrategy::Naive);
    let report = report_from(&suffixed("km", term), k, seed, &outcome, started);
    Ok((outcome.palette, report))
}

/// [`run_km_full`] from caller-supplied initial centers.
pub fn run_km_full_from(
    image: &RgbImage,
    initial: Palette,
    term: &Termination,
) -> Result<(Palette, RunReport)> {
    term.validate()?;
    let started = Instant::now();
    let k = initial.len();
    let samples = Samples::from_pixels(image);
    let outcome = lloyd(&samples, initial, term, AssignStrategy::Naive);
    let report = report_from(&suffixed("km", term), k, 0, &outcome, started);
    Ok((outcome.palette, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::RgbColor;
    use approx::assert_relative_eq;

    fn gray_samples(values: &[(f64, f64)]) -> Samples {
        Samples::new(
            values.iter().map(|&(v, _)| [v; 3]).collect(),
            values.iter().map(|&(_, w)| w).collect(),
        )
    }

    #[test]
    fn update_single_cluster_is_weighted_mean() {
        let s = Samples::new(vec![[0.0; 3], [255.0; 3]], vec![0.75, 0.25]);
        let p = update_centers(&s, &[0, 0], 1);
        assert_eq!(p.centers(), &[[63.75; 3]]);

        let s = gray_samples(&[(10.0, 0.5), (20.0, 0.5)]);
        assert_eq!(update_centers(&s, &[0, 0], 1).centers(), &[[15.0; 3]]);
    }

    #[test]
    fn empty_cluster_reseeded_at_worst_point() {
        // Cluster 1 is empty and gets re-seeded at the worst contributor.
        let s = gray_samples(&[(0.0, 0.4), (10.0, 0.4), (100.0, 0.2)]);
        let p = update_centers(&s, &[0, 0, 0], 2);
        // Mean of cluster 0 is 24; contributions 0.4*576, 0.4*196, 0.2*5776 (per channel).
        assert_eq!(p.centers()[0], [24.0; 3]);
        assert_eq!(p.centers()[1], [100.0; 3]);
    }

    #[test]
    fn multiple_empty_clusters_get_distinct_points() {
        let s = Samples::new(vec![[0.0; 3], [0.0; 3], [90.0; 3], [90.0; 3], [40.0; 3]], vec![1.0; 5]);
        let p = update_centers(&s, &[0, 0, 0, 0, 0], 3);
        let c = p.centers();
        assert_ne!(c[1], c[2]);
        assert!(c[1..].iter().all(|x| *x == [90.0; 3] || *x == [0.0; 3] || *x == [40.0; 3]));
    }

    #[test]
    fn weighted_sse_direct() {
        let s = Samples::new(vec![[3.0, 0.0, 0.0]], vec![1.0]);
        let p = Palette::new(vec![[0.0; 3]]).unwrap();
        assert_eq!(weighted_sse(&s, &p, &[0]), 9.0);
        let p = Palette::new(vec![[3.0, 0.0, 0.0]]).unwrap();
        assert_eq!(weighted_sse(&s, &p, &[0]), 0.0);
    }

    #[test]
    fn init_is_deterministic_and_validated() {
        let hist = ColorHistogram::from_counts((0..20u8).map(|i| (RgbColor::new(i, 2 * i, 3 * i), 1 + i as u64))).unwrap();
        let s = Samples::from_histogram(&hist);
        assert_eq!(init_centers(&s, 5, 11).unwrap(), init_centers(&s, 5, 11).unwrap());
        assert!(matches!(init_centers(&s, 21, 0), Err(Error::KOutOfRange { k: 21, max: 20 })));
        assert!(init_centers(&s, 0, 0).is_err());

        let mut all = init_centers(&s, 20, 3).unwrap().into_centers();
        all.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(all, s.points);
    }

    #[test]
    fn pixel_init_uses_distinct_colors() {
        let img = RgbImage::from_fn(10, 10, |x, _| RgbColor::new((x % 3) as u8, 0, 0)).unwrap();
        let p = init_centers_from_pixels(&img, 3, 5).unwrap();
        let mut reds: Vec<f64> = p.centers().iter().map(|c| c[0]).collect();
        reds.sort_by(f64::total_cmp);
        assert_eq!(reds, [0.0, 1.0, 2.0]);
        assert!(matches!(
            init_centers_from_pixels(&img, 4, 5),
            Err(Error::KOutOfRange { k: 4, max: 3 })
        ));
    }

    #[test]
    fn wsm_with_k_equal_to_unique_count_is_lossless() {
        let img = RgbImage::from_fn(8, 8, |x, y| RgbColor::new((x * 30) as u8, (y % 2 * 100) as u8, 5)).unwrap();
        let hist = ColorHistogram::from_image(&img);
        let (_, report) = run_wsm(&hist, hist.len(), &Termination::convergent(1e-4), 1).unwrap();
        assert_eq!(report.sse_history[0], 0.0);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn km_full_on_flat_image() {
        let img = RgbImage::filled(6, 5, RgbColor::new(10, 20, 30)).unwrap();
        let (p, report) = run_km_full(&img, 1, &Termination::default(), 0).unwrap();
        assert_eq!(p.centers(), &[[10.0, 20.0, 30.0]]);
        assert_eq!(report.sse, 0.0);
        assert_eq!(report.iterations, 10);
        assert_eq!(report.method, "km");
    }

    #[test]
    fn fixed_run_counts_iterations_and_evals() {
        let img = RgbImage::from_fn(16, 16, |x, y| RgbColor::new((x * 16) as u8, (y * 16) as u8, 0)).unwrap();
        let (_, report) = run_km_full(&img, 4, &Termination::fixed(7), 2).unwrap();
        assert_eq!(report.iterations, 7);
        assert_eq!(report.distance_evals, 7 * 256 * 4);
        for w in report.sse_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn finite_state_with_full_span_matches_naive() {
        let img = RgbImage::from_fn(20, 20, |x, y| RgbColor::new((x * 13) as u8, (y * 7) as u8, ((x * y) % 256) as u8)).unwrap();
        let s = Samples::from_pixels(&img);
        let init = init_centers_from_pixels(&img, 6, 4).unwrap();
        let term = Termination::fixed(8);
        let a = lloyd(&s, init.clone(), &term, AssignStrategy::Naive);
        let b = lloyd(&s, init, &term, AssignStrategy::FiniteState { neighbors: 6 });
        assert_eq!(a.memberships, b.memberships);
        assert_eq!(a.palette, b.palette);
        assert_relative_eq!(a.sse_history[7], b.sse_history[7]);
    }
}
