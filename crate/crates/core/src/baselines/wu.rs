//! Greedy orthogonal bipartitioning: split the box with the largest SSE at
//! the axis-aligned plane minimizing the summed SSE of both halves.

use super::boxes::{BoxMoments, ColorBox, MomentTable, ReducedHistogram};
use crate::cluster::Palette;
use crate::imageio::RgbImage;

pub fn wu_bipartition(image: &RgbImage, k: usize) -> Palette {
    let table = MomentTable::new(&ReducedHistogram::from_image(image));
    let mut boxes = vec![ColorBox::whole(&table)];
    let mut splittable = vec![true];
    while boxes.len() < k {
        let Some(pos) = (0..boxes.len())
            .filter(|&i| splittable[i] && boxes[i].moments.sse() > 0.0)
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
        match best_cut(&table, &boxes[pos]) {
            Some((axis, cut)) => {
                let (lower, upper) = boxes[pos].split(&table, axis, cut);
                boxes[pos] = lower;
                boxes.push(upper);
                splittable.push(true);
            }
            None => splittable[pos] = false,
        }
    }
    Palette::new(
        boxes
            .iter()
            .filter(|b| b.population() > 0.0)
            .map(|b| b.moments.mean())
            .collect(),
    )
    .expect("box centroids lie inside the color cube")
}

/// The `(axis, cut)` minimizing `SSE(lower) + SSE(upper)` over every plane
/// that leaves both halves populated. Since the box's total `sum_sq` is
/// fixed, this maximizes `|s_lo|^2/n_lo + |s_hi|^2/n_hi`.
pub(crate) fn best_cut(table: &MomentTable, b: &ColorBox) -> Option<(usize, usize)> {
    let whole = b.moments;
    let mut best: Option<(f64, usize, usize)> = None;
    for axis in 0..3 {
        for cut in b.lo[axis]..b.hi[axis] {
            let lower = b.slab(table, axis, b.lo[axis], cut, b.lo, b.hi);
            let upper = BoxMoments {
                count: whole.count - lower.count,
                sum: [
                    whole.sum[0] - lower.sum[0],
                    whole.sum[1] - lower.sum[1],
                    whole.sum[2] - lower.sum[2],
                ],
                sum_sq: whole.sum_sq - lower.sum_sq,
            };
            if lower.count <= 0.0 || upper.count <= 0.0 {
                continue;
            }
            let score = lower.norm_over_count() + upper.norm_over_count();
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, axis, cut));
            }
        }
    }
    best.map(|(_, axis, cut)| (axis, cut))
}
