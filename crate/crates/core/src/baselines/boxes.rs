//! The 32x32x32 reduced color histogram shared by the box-splitting
//! quantizers, with cumulative moments for O(1) box statistics.

use crate::imageio::RgbImage;

pub const BITS: u32 = 5;
pub const SIDE: usize = 1 << BITS;
const SHIFT: u32 = 8 - BITS;

/// Per-cell accumulated moments of the pixels that fall in the cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellMoments {
    pub count: f64,
    pub sum: [f64; 3],
    /// Second moments `rr, gg, bb, rg, rb, gb`.
    pub second: [f64; 6],
}

impl CellMoments {
    pub fn add(&mut self, other: &CellMoments) {
        self.count += other.count;
        for c in 0..3 {
            self.sum[c] += other.sum[c];
        }
        for c in 0..6 {
            self.second[c] += other.second[c];
        }
    }

    pub fn sum_sq(&self) -> f64 {
        self.second[0] + self.second[1] + self.second[2]
    }

    /// Squared error of the cell's pixels around their mean.
    pub fn sse(&self) -> f64 {
        if self.count <= 0.0 {
            return 0.0;
        }
        let norm = self.sum[0] * self.sum[0] + self.sum[1] * self.sum[1] + self.sum[2] * self.sum[2];
        (self.sum_sq() - norm / self.count).max(0.0)
    }

    pub fn mean(&self) -> [f64; 3] {
        self.sum.map(|s| s / self.count)
    }
}

pub fn cell_coord(v: u8) -> usize {
    usize::from(v >> SHIFT)
}

pub fn cell_index(r: usize, g: usize, b: usize) -> usize {
    (r * SIDE + g) * SIDE + b
}

/// The reduced histogram: one [`CellMoments`] per 5-bit cell.
pub struct ReducedHistogram {
    pub cells: Vec<CellMoments>,
}

impl ReducedHistogram {
    pub fn from_image(image: &RgbImage) -> Self {
        let mut cells = vec![CellMoments::default(); SIDE * SIDE * SIDE];
        for p in image.pixels() {
            let [r, g, b] = p.to_f64();
            let cell = &mut cells[cell_index(cell_coord(p.r), cell_coord(p.g), cell_coord(p.b))];
            cell.count += 1.0;
            cell.sum[0] += r;
            cell.sum[1] += g;
            cell.sum[2] += b;
            cell.second[0] += r * r;
            cell.second[1] += g * g;
            cell.second[2] += b * b;
            cell.second[3] += r * g;
            cell.second[4] += r * b;
            cell.second[5] += g * b;
        }
        Self { cells }
    }

    pub fn nonempty_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cells.len()).filter(|&i| self.cells[i].count > 0.0)
    }
}

/// Cumulative moment table over `(SIDE + 1)^3` entries with a zero border,
/// so any axis-aligned box sum is an eight-term inclusion-exclusion.
pub struct MomentTable {
    count: Vec<f64>,
    sum: Vec<[f64; 3]>,
    sum_sq: Vec<f64>,
}

const T: usize = SIDE + 1;

fn tidx(r: usize, g: usize, b: usize) -> usize {
    (r * T + g) * T + b
}

/// Box statistics: population, channel sums and sum of squared channel values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoxMoments {
    pub count: f64,
    pub sum: [f64; 3],
    pub sum_sq: f64,
}

impl BoxMoments {
    pub fn sse(&self) -> f64 {
        if self.count <= 0.0 {
            return 0.0;
        }
        (self.sum_sq - self.norm_over_count()).max(0.0)
    }

    /// `|sum|^2 / count`, the part of the SSE that a split can change.
    pub fn norm_over_count(&self) -> f64 {
        (self.sum[0] * self.sum[0] + self.sum[1] * self.sum[1] + self.sum[2] * self.sum[2])
            / self.count
    }

    pub fn mean(&self) -> [f64; 3] {
        self.sum.map(|s| s / self.count)
    }

    fn minus(self, o: BoxMoments) -> BoxMoments {
        BoxMoments {
            count: self.count - o.count,
            sum: [self.sum[0] - o.sum[0], self.sum[1] - o.sum[1], self.sum[2] - o.sum[2]],
            sum_sq: self.sum_sq - o.sum_sq,
        }
    }
}

impl MomentTable {
    pub fn new(hist: &ReducedHistogram) -> Self {
        let n = T * T * T;
        let mut count = vec![0.0; n];
        let mut sum = vec![[0.0; 3]; n];
        let mut sum_sq = vec![0.0; n];
        for r in 0..SIDE {
            for g in 0..SIDE {
                for b in 0..SIDE {
                    let c = &hist.cells[cell_index(r, g, b)];
                    let i = tidx(r + 1, g + 1, b + 1);
                    count[i] = c.count;
                    sum[i] = c.sum;
                    sum_sq[i] = c.sum_sq();
                }
            }
        }
        // Prefix sums along each axis in turn.
        for axis in 0..3 {
            for r in 1..T {
                for g in 1..T {
                    for b in 1..T {
                        let i = tidx(r, g, b);
                        let j = match axis {
                            0 => tidx(r - 1, g, b),
                            1 => tidx(r, g - 1, b),
                            _ => tidx(r, g, b - 1),
                        };
                        count[i] += count[j];
                        let s = sum[j];
                        for (acc, v) in sum[i].iter_mut().zip(s) {
                            *acc += v;
                        }
                        sum_sq[i] += sum_sq[j];
                    }
                }
            }
        }
        Self { count, sum, sum_sq }
    }

    fn at(&self, r: usize, g: usize, b: usize) -> BoxMoments {
        let i = tidx(r, g, b);
        BoxMoments {
            count: self.count[i],
            sum: self.sum[i],
            sum_sq: self.sum_sq[i],
        }
    }

    /// Moments of the cells in the inclusive box `lo..=hi`.
    pub fn box_moments(&self, lo: [usize; 3], hi: [usize; 3]) -> BoxMoments {
        let (r0, g0, b0) = (lo[0], lo[1], lo[2]);
        let (r1, g1, b1) = (hi[0] + 1, hi[1] + 1, hi[2] + 1);
        let pos = [
            self.at(r1, g1, b1),
            self.at(r1, g0, b0),
            self.at(r0, g1, b0),
            self.at(r0, g0, b1),
        ];
        let neg = [
            self.at(r0, g1, b1),
            self.at(r1, g0, b1),
            self.at(r1, g1, b0),
            self.at(r0, g0, b0),
        ];
        let mut out = BoxMoments::default();
        for p in pos {
            out.count += p.count;
            out.sum_sq += p.sum_sq;
            for c in 0..3 {
                out.sum[c] += p.sum[c];
            }
        }
        for n in neg {
            out = out.minus(n);
        }
        out
    }
}

/// An axis-aligned box of reduced-histogram cells with its moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorBox {
    /// Inclusive lower cell bound per channel.
    pub lo: [usize; 3],
    /// Inclusive upper cell bound per channel.
    pub hi: [usize; 3],
    pub moments: BoxMoments,
}

impl ColorBox {
    pub fn new(table: &MomentTable, lo: [usize; 3], hi: [usize; 3]) -> Self {
        Self {
            lo,
            hi,
            moments: table.box_moments(lo, hi),
        }
    }

    pub fn whole(table: &MomentTable) -> Self {
        Self::new(table, [0; 3], [SIDE - 1; 3])
    }

    pub fn population(&self) -> f64 {
        self.moments.count
    }

    /// Shrinks the bounds to the smallest box holding the same population.
    pub fn shrink(&self, table: &MomentTable) -> Self {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for axis in 0..3 {
            while lo[axis] < hi[axis] && self.slab(table, axis, lo[axis], lo[axis], lo, hi).count == 0.0 {
                lo[axis] += 1;
            }
            while hi[axis] > lo[axis] && self.slab(table, axis, hi[axis], hi[axis], lo, hi).count == 0.0 {
                hi[axis] -= 1;
            }
        }
        Self::new(table, lo, hi)
    }

    /// Moments of the sub-box whose `axis` coordinate lies in `from..=to`.
    pub fn slab(
        &self,
        table: &MomentTable,
        axis: usize,
        from: usize,
        to: usize,
        lo: [usize; 3],
        hi: [usize; 3],
    ) -> BoxMoments {
        let mut l = lo;
        let mut h = hi;
        l[axis] = from;
        h[axis] = to;
        table.box_moments(l, h)
    }

    /// Splits into `lo..=cut` and `cut+1..=hi` along `axis`.
    pub fn split(&self, table: &MomentTable, axis: usize, cut: usize) -> (Self, Self) {
        debug_assert!(self.lo[axis] <= cut && cut < self.hi[axis]);
        let mut first_hi = self.hi;
        first_hi[axis] = cut;
        let mut second_lo = self.lo;
        second_lo[axis] = cut + 1;
        (
            Self::new(table, self.lo, first_hi),
            Self::new(table, second_lo, self.hi),
        )
    }

    pub fn is_single_cell(&self) -> bool {
        self.lo == self.hi
    }
}
