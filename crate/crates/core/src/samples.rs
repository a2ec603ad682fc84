//! Weighted point sets in RGB space, the common input of the iterative
//! quantizers.

use crate::histogram::ColorHistogram;
use crate::imageio::RgbImage;

/// Points with nonnegative weights. Built from a histogram the weights are
/// normalized pixel frequencies; built from raw pixels every weight is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl Samples {
    pub fn new(points: Vec<[f64; 3]>, weights: Vec<f64>) -> Self {
        assert_eq!(points.len(), weights.len(), "one weight per point");
        Self { points, weights }
    }

    pub fn from_histogram(hist: &ColorHistogram) -> Self {
        let (points, weights) = hist
            .entries()
            .iter()
            .map(|e| (e.color.to_f64(), e.weight))
            .unzip();
        Self { points, weights }
    }

    /// Every pixel as its own point with unit weight.
    pub fn from_pixels(image: &RgbImage) -> Self {
        Self {
            points: image.pixels().iter().map(|c| c.to_f64()).collect(),
            weights: vec![1.0; image.pixel_count()],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[inline]
pub fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}
