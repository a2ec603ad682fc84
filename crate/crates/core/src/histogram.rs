//! Unique-color extraction with frequency weights.
//!
//! Colors are collected in a chained hash table keyed by a universal hash
//! `h(x) = (a1 r + a2 g + a3 b) mod m` with prime `m`. The hash only decides
//! bucketing; the resulting color counts never depend on it.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::imageio::{RgbColor, RgbImage};
use crate::rng;

/// Parameters of the universal hash family `h_a(x) = (sum a_i x_i) mod m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniversalHashParams {
    modulus: u64,
    coeffs: [u64; 3],
}

/// Deterministic Miller-Rabin; these witnesses decide every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| (u128::from(a) * u128::from(b) % u128::from(n)) as u64;
    let pow = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            exp >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in WITNESSES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

impl UniversalHashParams {
    pub fn new(modulus: u64, coeffs: [u64; 3]) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(Error::InvalidParameter(format!(
                "hash modulus {modulus} is not prime"
            )));
        }
        if let Some(a) = coeffs.iter().find(|&&a| a >= modulus) {
            return Err(Error::InvalidParameter(format!(
                "hash coefficient {a} is not below modulus {modulus}"
            )));
        }
        Ok(Self { modulus, coeffs })
    }

    /// Draws coefficients for the smallest prime modulus that keeps the load
    /// factor at or below 1/2 for `expected_unique` keys.
    pub fn random(expected_unique: usize, rng: &mut impl Rng) -> Self {
        let modulus = next_prime(2 * expected_unique.max(1) as u64);
        let coeffs = std::array::from_fn(|_| rng.random_range(0..modulus));
        Self { modulus, coeffs }
    }

    /// Default parameters for an image, expecting `width * height / 4` unique colors.
    pub fn for_image(image: &RgbImage, seed: u64) -> Self {
        Self::random(image.pixel_count() / 4, &mut rng::seeded(seed))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coeffs(&self) -> [u64; 3] {
        self.coeffs
    }
}

/// Bucket index of `color` in `[0, m)`.
pub fn universal_hash(color: RgbColor, params: &UniversalHashParams) -> u64 {
    let [a1, a2, a3] = params.coeffs.map(u128::from);
    let sum = a1 * u128::from(color.r) + a2 * u128::from(color.g) + a3 * u128::from(color.b);
    (sum % u128::from(params.modulus)) as u64
}

const NIL: u32 = u32::MAX;

struct ChainNode {
    color: RgbColor,
    count: u64,
    next: u32,
}

/// Separate-chaining hash table from color to pixel count. Nodes live in a
/// single vector in insertion order, which doubles as first-occurrence order.
struct ChainedColorTable {
    params: UniversalHashParams,
    heads: Vec<u32>,
    nodes: Vec<ChainNode>,
}

impl ChainedColorTable {
    fn new(params: UniversalHashParams) -> Self {
        Self {
            params,
            heads: vec![NIL; params.modulus as usize],
            nodes: Vec::new(),
        }
    }

    fn increment(&mut self, color: RgbColor) {
        let bucket = universal_hash(color, &self.params) as usize;
        let mut cursor = self.heads[bucket];
        while cursor != NIL {
            let node = &mut self.nodes[cursor as usize];
            if node.color == color {
                node.count += 1;
                return;
            }
            cursor = node.next;
        }
        self.nodes.push(ChainNode {
            color,
            count: 1,
            next: self.heads[bucket],
        });
        self.heads[bucket] = (self.nodes.len() - 1) as u32;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramEntry {
    pub color: RgbColor,
    pub count: u64,
    /// `count / total_pixels`.
    pub weight: f64,
}

/// The unique colors of an image with their normalized frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorHistogram {
    entries: Vec<HistogramEntry>,
    total_pixels: u64,
}

impl ColorHistogram {
    /// Builds a histogram from explicit `(color, count)` pairs. Colors must
    /// be distinct and counts positive.
    pub fn from_counts(counts: impl IntoIterator<Item = (RgbColor, u64)>) -> Result<Self> {
        let counts: Vec<_> = counts.into_iter().collect();
        if counts.is_empty() {
            return Err(Error::InvalidParameter("histogram has no entries".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(counts.len());
        for (color, count) in &counts {
            if *count == 0 {
                return Err(Error::InvalidParameter(format!("zero count for {color:?}")));
            }
            if !seen.insert(*color) {
                return Err(Error::InvalidParameter(format!("duplicate color {color:?}")));
            }
        }
        let total_pixels: u64 = counts.iter().map(|(_, c)| c).sum();
        let entries = counts
            .into_iter()
            .map(|(color, count)| HistogramEntry {
                color,
                count,
                weight: count as f64 / total_pixels as f64,
            })
            .collect();
        Ok(Self {
            entries,
            total_pixels,
        })
    }

    /// Histogram with the default hash parameters (seed 0).
    pub fn from_image(image: &RgbImage) -> Self {
        build_histogram(image, &UniversalHashParams::for_image(image, 0))
    }

    pub fn entries(&self) -> &[HistogramEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_pixels(&self) -> u64 {
        self.total_pixels
    }

    /// Writes `r,g,b,count` rows in entry order, with a header line.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "g", "b", "count"])?;
        for e in &self.entries {
            w.write_record([
                e.color.r.to_string(),
                e.color.g.to_string(),
                e.color.b.to_string(),
                e.count.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Collects the unique colors of `image` in first-occurrence (row-major) order.
pub fn build_histogram(image: &RgbImage, params: &UniversalHashParams) -> ColorHistogram {
    let mut table = ChainedColorTable::new(*params);
    for &p in image.pixels() {
        table.increment(p);
    }
    let total_pixels = image.pixel_count() as u64;
    let entries = table
        .nodes
        .into_iter()
        .map(|n| HistogramEntry {
            color: n.color,
            count: n.count,
            weight: n.count as f64 / total_pixels as f64,
        })
        .collect();
    ColorHistogram {
        entries,
        total_pixels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: u64, a: [u64; 3]) -> UniversalHashParams {
        UniversalHashParams::new(m, a).unwrap()
    }

    #[test]
    fn hash_direct_values() {
        assert_eq!(universal_hash(RgbColor::new(12, 200, 7), &params(7, [0, 0, 0])), 0);
        assert_eq!(universal_hash(RgbColor::WHITE, &params(7, [1, 1, 1])), 2);
    }

    #[test]
    fn params_are_validated() {
        assert!(UniversalHashParams::new(8, [1, 1, 1]).is_err());
        assert!(UniversalHashParams::new(7, [1, 7, 1]).is_err());
        let p = UniversalHashParams::random(1000, &mut rng::seeded(3));
        assert_eq!(p.modulus(), 2003);
        assert!(p.coeffs().iter().all(|&a| a < 2003));
    }

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(next_prime(24), 29);
        assert_eq!(next_prime(0), 2);

        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial(n), "{n}");
        }
        // Strong pseudoprime to several small bases, and a Carmichael number.
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(561));
        assert!(is_prime(4_294_967_311));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(u64::MAX));
    }

    #[test]
    fn single_pixel() {
        let img = RgbImage::filled(1, 1, RgbColor::new(3, 4, 5)).unwrap();
        let h = ColorHistogram::from_image(&img);
        assert_eq!(h.len(), 1);
        assert_eq!(h.entries()[0].weight, 1.0);
    }

    #[test]
    fn counts_and_weights_in_scan_order() {
        let img = RgbImage::new(
            2,
            2,
            vec![RgbColor::BLACK, RgbColor::BLACK, RgbColor::WHITE, RgbColor::BLACK],
        )
        .unwrap();
        let h = ColorHistogram::from_image(&img);
        let got: Vec<_> = h.entries().iter().map(|e| (e.color, e.count, e.weight)).collect();
        assert_eq!(
            got,
            [(RgbColor::BLACK, 3, 0.75), (RgbColor::WHITE, 1, 0.25)]
        );
    }

    #[test]
    fn degenerate_hash_still_counts_correctly() {
        // Every color lands in bucket 0, so the table is one long chain.
        let img = RgbImage::from_fn(16, 16, |x, y| RgbColor::new((x % 5) as u8, (y % 3) as u8, 9)).unwrap();
        let h = build_histogram(&img, &params(2, [0, 0, 0]));
        assert_eq!(h.len(), 15);
        assert_eq!(h.entries().iter().map(|e| e.count).sum::<u64>(), 256);
    }

    #[test]
    fn from_counts_rejects_bad_input() {
        assert!(ColorHistogram::from_counts(vec![]).is_err());
        assert!(ColorHistogram::from_counts(vec![(RgbColor::BLACK, 0)]).is_err());
        assert!(
            ColorHistogram::from_counts(vec![(RgbColor::BLACK, 1), (RgbColor::BLACK, 2)]).is_err()
        );
    }

    #[test]
    fn csv_dump() {
        let h = ColorHistogram::from_counts(vec![(RgbColor::new(1, 2, 3), 4), (RgbColor::WHITE, 1)])
            .unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "r,g,b,count\n1,2,3,4\n255,255,255,1\n"
        );
    }
}
