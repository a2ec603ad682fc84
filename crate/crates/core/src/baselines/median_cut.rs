//! Median cut: split the most populous box at the population median of its
//! longest axis.

use super::boxes::{ColorBox, MomentTable, ReducedHistogram};
use crate::cluster::Palette;
use crate::imageio::RgbImage;

/// Returns up to `k` centers; fewer only when the image occupies fewer than
/// `k` reduced cells.
pub fn median_cut(image: &RgbImage, k: usize) -> Palette {
    let table = MomentTable::new(&ReducedHistogram::from_image(image));
    // Boxes carry their creation sequence number for tie-breaking.
    let mut boxes: Vec<(usize, ColorBox)> = vec![(0, ColorBox::whole(&table).shrink(&table))];
    let mut next_id = 1;
    while boxes.len() < k {
        let Some(pos) = boxes
            .iter()
            .enumerate()
            .filter(|(_, (_, b))| !b.is_single_cell())
            .max_by(|(_, (ia, a)), (_, (ib, b))| {
                a.population()
                    .total_cmp(&b.population())
                    .then(ib.cmp(ia))
            })
            .map(|(pos, _)| pos)
        else {
            break;
        };
        let (_, parent) = boxes[pos];
        let (lower, upper) = split_at_median(&table, &parent);
        boxes[pos] = (next_id, lower);
        boxes.push((next_id + 1, upper));
        next_id += 2;
    }
    Palette::new(boxes.iter().map(|(_, b)| b.moments.mean()).collect())
        .expect("box centroids lie inside the color cube")
}

fn longest_axis(b: &ColorBox) -> usize {
    let mut best = 0;
    for axis in 1..3 {
        if b.hi[axis] - b.lo[axis] > b.hi[best] - b.lo[best] {
            best = axis;
        }
    }
    best
}

fn split_at_median(table: &MomentTable, b: &ColorBox) -> (ColorBox, ColorBox) {
    let axis = longest_axis(b);
    let half = b.population() / 2.0;
    let mut cumulative = 0.0;
    let mut cut = b.hi[axis] - 1;
    for plane in b.lo[axis]..b.hi[axis] {
        cumulative += b.slab(table, axis, plane, plane, b.lo, b.hi).count;
        if cumulative >= half {
            cut = plane;
            break;
        }
    }
    let (lower, upper) = b.split(table, axis, cut);
    (lower.shrink(table), upper.shrink(table))
}
