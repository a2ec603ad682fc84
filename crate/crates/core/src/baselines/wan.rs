//! Variance-based splitting: the box with the largest SSE is cut
//! perpendicular to its major axis, at the point minimizing the marginal
//! squared error, i.e. the summed squared error of the pixel coordinates
//! along that axis on the two sides.
//!
//! Boxes stay axis-aligned, so the major axis is the coordinate axis that
//! dominates the principal eigenvector of the box covariance.

use super::boxes::{cell_index, CellMoments, ReducedHistogram, SIDE};
use crate::cluster::Palette;
use crate::imageio::RgbImage;

const EIGEN_TOL: f64 = 1e-10;

struct WanBox {
    lo: [usize; 3],
    hi: [usize; 3],
    moments: CellMoments,
    /// Per axis, the marginal moments of each cell plane in `lo..=hi`.
    planes: [Vec<Marginal>; 3],
    splittable: bool,
}

impl WanBox {
    fn new(hist: &ReducedHistogram, lo: [usize; 3], hi: [usize; 3]) -> Self {
        let mut moments = CellMoments::default();
        let mut planes: [Vec<Marginal>; 3] =
            std::array::from_fn(|a| vec![Marginal::default(); hi[a] - lo[a] + 1]);
        for r in lo[0]..=hi[0] {
            for g in lo[1]..=hi[1] {
                for b in lo[2]..=hi[2] {
                    let cell = &hist.cells[cell_index(r, g, b)];
                    if cell.count == 0.0 {
                        continue;
                    }
                    moments.add(cell);
                    for (axis, coord) in [r, g, b].into_iter().enumerate() {
                        let m = &mut planes[axis][coord - lo[axis]];
                        m.count += cell.count;
                        m.sum += cell.sum[axis];
                        m.sum_sq += cell.second[axis];
                    }
                }
            }
        }
        let splittable = (0..3).any(|a| planes[a].iter().filter(|m| m.count > 0.0).count() > 1);
        Self {
            lo,
            hi,
            moments,
            planes,
            splittable,
        }
    }
}

pub fn wan_split(image: &RgbImage, k: usize) -> Palette {
    let hist = ReducedHistogram::from_image(image);
    let mut boxes = vec![WanBox::new(&hist, [0; 3], [SIDE - 1; 3])];
    while boxes.len() < k {
        let Some(pos) = (0..boxes.len())
            .filter(|&i| boxes[i].splittable)
            .max_by(|&a, &b| {
                boxes[a]
                    .moments
                    .sse()
                    .total_cmp(&boxes[b].moments.sse())
                    .then(b.cmp(&a))
            })
        else {
            break;
        };
        match split_box(&boxes[pos]) {
            Some((axis, cut)) => {
                let parent = &boxes[pos];
                let (lo, hi) = (parent.lo, parent.hi);
                let mut first_hi = hi;
                first_hi[axis] = cut;
                let mut second_lo = lo;
                second_lo[axis] = cut + 1;
                boxes[pos] = WanBox::new(&hist, lo, first_hi);
                boxes.push(WanBox::new(&hist, second_lo, hi));
            }
            None => boxes[pos].splittable = false,
        }
    }
    Palette::new(
        boxes
            .iter()
            .filter(|b| b.moments.count > 0.0)
            .map(|b| b.moments.mean())
            .collect(),
    )
    .expect("box centroids lie inside the color cube")
}

/// Covariance of the pixels summarized by `m`.
fn covariance(m: &CellMoments) -> [[f64; 3]; 3] {
    let n = m.count;
    let mean = m.mean();
    let second = |i: usize, j: usize| -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => m.second[0],
            (1, 1) => m.second[1],
            (2, 2) => m.second[2],
            (0, 1) => m.second[3],
            (0, 2) => m.second[4],
            _ => m.second[5],
        }
    };
    let mut cov = [[0.0; 3]; 3];
    for (i, row) in cov.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = second(i, j) / n - mean[i] * mean[j];
        }
    }
    cov
}

/// Eigenpairs of a symmetric 3x3 matrix by cyclic Jacobi rotations, sorted
/// by decreasing eigenvalue. Eigenvectors are unit length.
#[allow(clippy::needless_range_loop)]
pub(crate) fn symmetric_eigen(mut a: [[f64; 3]; 3]) -> [(f64, [f64; 3]); 3] {
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = a.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for _ in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off <= EIGEN_TOL * scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q].abs() <= f64::MIN_POSITIVE {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for row in a.iter_mut() {
                let (akp, akq) = (row[p], row[q]);
                row[p] = c * akp - s * akq;
                row[q] = s * akp + c * akq;
            }
            for col in 0..3 {
                let (apk, aqk) = (a[p][col], a[q][col]);
                a[p][col] = c * apk - s * aqk;
                a[q][col] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vkp, vkq) = (row[p], row[q]);
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    let mut pairs: [(f64, [f64; 3]); 3] =
        std::array::from_fn(|i| (a[i][i], [v[0][i], v[1][i], v[2][i]]));
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    pairs
}

/// Coordinate axes ordered by their weight in the principal eigenvector,
/// ties to the lower index.
fn major_axes(m: &CellMoments) -> [usize; 3] {
    let (_, v) = symmetric_eigen(covariance(m))[0];
    let mut axes = [0, 1, 2];
    axes.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    axes
}

/// `(axis, cut)` splitting `b` into `lo..=cut` and `cut+1..=hi` along the
/// first major axis that has two populated planes.
fn split_box(b: &WanBox) -> Option<(usize, usize)> {
    for axis in major_axes(&b.moments) {
        let (coords, planes): (Vec<f64>, Vec<Marginal>) = b.planes[axis]
            .iter()
            .enumerate()
            .filter(|(_, m)| m.count > 0.0)
            .map(|(i, m)| (i as f64, *m))
            .unzip();
        if let Some(at) = best_threshold(&coords, &planes) {
            return Some((axis, b.lo[axis] + coords[at - 1] as usize));
        }
    }
    None
}

/// Moments of pixel coordinates along one axis.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Marginal {
    pub count: f64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Marginal {
    fn sse(&self) -> f64 {
        if self.count <= 0.0 {
            return 0.0;
        }
        (self.sum_sq - self.sum * self.sum / self.count).max(0.0)
    }
}

/// Given planes sorted by coordinate, the split index `at` (lower side is
/// `..at`) minimizing the two-sided marginal squared error. Cuts only fall
/// between distinct projection values.
pub(crate) fn best_threshold(projections: &[f64], cells: &[Marginal]) -> Option<usize> {
    let total = cells.iter().fold(Marginal::default(), |acc, c| Marginal {
        count: acc.count + c.count,
        sum: acc.sum + c.sum,
        sum_sq: acc.sum_sq + c.sum_sq,
    });
    let mut lower = Marginal::default();
    let mut best: Option<(f64, usize)> = None;
    for at in 1..cells.len() {
        let c = cells[at - 1];
        lower.count += c.count;
        lower.sum += c.sum;
        lower.sum_sq += c.sum_sq;
        if projections[at] <= projections[at - 1] {
            continue;
        }
        let upper = Marginal {
            count: total.count - lower.count,
            sum: total.sum - lower.sum,
            sum_sq: total.sum_sq - lower.sum_sq,
        };
        let cost = lower.sse() + upper.sse();
        if best.is_none_or(|(b, _)| cost < b) {
            best = Some((cost, at));
        }
    }
    best.map(|(_, at)| at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::RgbColor;

    #[test]
    fn single_color_gives_one_center() {
        let img = RgbImage::filled(4, 2, RgbColor::new(9, 99, 199)).unwrap();
        assert_eq!(wan_split(&img, 5).centers(), &[[9.0, 99.0, 199.0]]);
    }

    #[test]
    fn eigen_of_diagonal_and_rotated() {
        let pairs = symmetric_eigen([[1.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 3.0]]);
        assert_eq!(pairs.map(|p| p.0), [5.0, 3.0, 1.0]);
        assert!((pairs[0].1[1].abs() - 1.0).abs() < 1e-12);

        // A line along (1,1,1) has all its variance on that direction.
        let pairs = symmetric_eigen([[2.0; 3]; 3]);
        assert!((pairs[0].0 - 6.0).abs() < 1e-9);
        let s = 1.0 / 3f64.sqrt();
        for c in pairs[0].1 {
            assert!((c.abs() - s).abs() < 1e-9);
        }
    }

    #[test]
    fn line_segment_split_matches_exhaustive_threshold_scan() {
        // Gray pixels on the diagonal with uneven multiplicities.
        let levels: [(u8, usize); 6] = [(8, 5), (40, 1), (72, 2), (150, 7), (200, 1), (248, 4)];
        let mut pixels = Vec::new();
        for &(v, n) in &levels {
            pixels.extend(std::iter::repeat_n(RgbColor::new(v, v, v), n));
        }
        let img = RgbImage::new(pixels.len(), 1, pixels.clone()).unwrap();
        let mut centers = wan_split(&img, 2).into_centers();
        centers.sort_by(|a, b| a[0].total_cmp(&b[0]));

        // Oracle: try every threshold between consecutive levels directly on pixels.
        let values: Vec<f64> = pixels.iter().map(|p| f64::from(p.r)).collect();
        let sse = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| 3.0 * (x - m) * (x - m)).sum::<f64>()
        };
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for &(level, _) in &levels[1..] {
            let cut = f64::from(level);
            let lo: Vec<f64> = values.iter().copied().filter(|&v| v < cut).collect();
            let hi: Vec<f64> = values.iter().copied().filter(|&v| v >= cut).collect();
            let cost = sse(&lo) + sse(&hi);
            if cost < best.0 {
                let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
                best = (cost, mean(&lo), mean(&hi));
            }
        }
        assert!((centers[0][0] - best.1).abs() < 1e-9, "{centers:?} vs {best:?}");
        assert!((centers[1][0] - best.2).abs() < 1e-9);
    }
}
