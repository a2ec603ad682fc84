//! One entry point for every quantizer, so drivers can treat them uniformly.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::baselines::{self, FuzzyParams, SkmParams};
use crate::cluster::{
    init_centers, init_centers_from_pixels, lloyd, run_km_full, run_wsm, AssignStrategy, LloydOutcome,
    Palette, RunReport, Termination,
};
use crate::error::{Error, Result};
use crate::histogram::ColorHistogram;
use crate::imageio::RgbImage;
use crate::samples::Samples;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Mc,
    Wan,
    Wu,
    Mmm,
    Fcm,
    Pim,
    Km,
    KmC,
    Fkm,
    FkmC,
    Skm,
    Wsm,
    WsmC,
}

impl Method {
    pub const ALL: [Method; 13] = [
        Method::Mc,
        Method::Wan,
        Method::Wu,
        Method::Mmm,
        Method::Fcm,
        Method::Pim,
        Method::Km,
        Method::KmC,
        Method::Fkm,
        Method::FkmC,
        Method::Skm,
        Method::Wsm,
        Method::WsmC,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Wan => "wan",
            Method::Wu => "wu",
            Method::Mmm => "mmm",
            Method::Fcm => "fcm",
            Method::Pim => "pim",
            Method::Km => "km",
            Method::KmC => "km-c",
            Method::Fkm => "fkm",
            Method::FkmC => "fkm-c",
            Method::Skm => "skm",
            Method::Wsm => "wsm",
            Method::WsmC => "wsm-c",
        }
    }

    /// Whether repeated runs with different seeds can differ.
    pub fn is_randomized(self) -> bool {
        !matches!(self, Method::Mc | Method::Wan | Method::Wu)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Tunables shared by all methods; each method reads the ones it uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodParams {
    /// Iterations of the fixed-iteration k-means variants.
    pub max_iters: usize,
    /// Relative SSE improvement threshold of the convergent variants.
    pub epsilon: f64,
    /// FKM search-set size.
    pub k_prime: usize,
    /// SKM warm-up iterations.
    pub i_prime: usize,
    /// SKM stability threshold (squared movement).
    pub theta: f64,
    /// FCM/PIM fuzziness.
    pub q: f64,
    /// PIM offset fraction.
    pub delta: f64,
    pub fuzzy_iters: usize,
    /// Run FCM/PIM over every pixel instead of the color histogram.
    pub fuzzy_full_pixels: bool,
}

impl Default for MethodParams {
    fn default() -> Self {
        Self {
            max_iters: Termination::DEFAULT_ITERS,
            epsilon: Termination::DEFAULT_EPSILON,
            k_prime: 8,
            i_prime: 10,
            theta: 1.0,
            q: 2.0,
            delta: 0.4,
            fuzzy_iters: 10,
            fuzzy_full_pixels: false,
        }
    }
}

impl MethodParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return bad(format!("epsilon must be nonnegative, got {}", self.epsilon));
        }
        if self.k_prime == 0 {
            return bad("k_prime must be at least 1".into());
        }
        if self.i_prime == 0 {
            return bad("i_prime must be at least 1".into());
        }
        if self.theta.is_nan() || self.theta < 0.0 {
            return bad(format!("theta must be nonnegative, got {}", self.theta));
        }
        if self.q.is_nan() || self.q <= 1.0 {
            return bad(format!("q must exceed 1, got {}", self.q));
        }
        if !(0.0..0.5).contains(&self.delta) {
            return bad(format!("delta must lie in [0, 0.5), got {}", self.delta));
        }
        if self.fuzzy_iters == 0 {
            return bad("fuzzy_iters must be at least 1".into());
        }
        Ok(())
    }

    fn fixed(&self) -> Termination {
        Termination::fixed(self.max_iters)
    }

    fn convergent(&self) -> Termination {
        Termination::convergent(self.epsilon)
    }
}

/// Generates a `k`-color palette for `image` with `method`. The reported
/// time covers palette generation only, including any histogram building,
/// and excludes pixel mapping.
pub fn run(
    method: Method,
    image: &RgbImage,
    k: usize,
    params: &MethodParams,
    seed: u64,
) -> Result<(Palette, RunReport)> {
    params.validate()?;
    if k == 0 {
        return Err(Error::KOutOfRange { k, max: image.pixel_count() });
    }
    let started = Instant::now();
    let one_pass = |palette: Palette| {
        let mut report = RunReport::new(method.id(), k, seed);
        report.elapsed = started.elapsed();
        (palette, report)
    };
    let km_family = |outcome: LloydOutcome| {
        let report = RunReport {
            method: method.id().to_string(),
            k,
            seed,
            iterations: outcome.iterations(),
            sse: outcome.sse_history.last().copied().unwrap_or(f64::NAN),
            sse_history: outcome.sse_history,
            distance_evals: outcome.distance_evals,
            elapsed: started.elapsed(),
        };
        (outcome.palette, report)
    };

    let result = match method {
        Method::Mc => one_pass(baselines::median_cut(image, k)),
        Method::Wan => one_pass(baselines::wan_split(image, k)),
        Method::Wu => one_pass(baselines::wu_bipartition(image, k)),
        Method::Mmm => {
            let samples = Samples::from_histogram(&ColorHistogram::from_image(image));
            one_pass(baselines::mmm(&samples, k, seed)?)
        }
        Method::Fcm | Method::Pim => {
            let samples = if params.fuzzy_full_pixels {
                Samples::from_pixels(image)
            } else {
                Samples::from_histogram(&ColorHistogram::from_image(image))
            };
            let initial = if params.fuzzy_full_pixels {
                init_centers_from_pixels(image, k, seed)?
            } else {
                init_centers(&samples, k, seed)?
            };
            let fuzzy = FuzzyParams {
                q: params.q,
                iters: params.fuzzy_iters,
                delta: (method == Method::Pim).then_some(params.delta),
            };
            let outcome = baselines::fuzzy_cmeans(&samples, initial, &fuzzy);
            let report = RunReport {
                method: method.id().to_string(),
                k,
                seed,
                iterations: outcome.objective_history.len(),
                sse: outcome.objective_history.last().copied().unwrap_or(f64::NAN),
                sse_history: outcome.objective_history,
                distance_evals: outcome.distance_evals,
                elapsed: started.elapsed(),
            };
            (outcome.palette, report)
        }
        Method::Km => run_km_full(image, k, &params.fixed(), seed)?,
        Method::KmC => run_km_full(image, k, &params.convergent(), seed)?,
        Method::Fkm | Method::FkmC => {
            let term = if method == Method::Fkm { params.fixed() } else { params.convergent() };
            let initial = init_centers_from_pixels(image, k, seed)?;
            let samples = Samples::from_pixels(image);
            let neighbors = params.k_prime.min(k);
            km_family(lloyd(&samples, initial, &term, AssignStrategy::FiniteState { neighbors }))
        }
        Method::Skm => {
            let initial = init_centers_from_pixels(image, k, seed)?;
            let samples = Samples::from_pixels(image);
            let skm = SkmParams {
                warmup_iters: params.i_prime,
                theta: params.theta,
            };
            km_family(baselines::skm(&samples, initial, &skm, &params.convergent()).lloyd)
        }
        Method::Wsm | Method::WsmC => {
            let term = if method == Method::Wsm { params.fixed() } else { params.convergent() };
            let hist = ColorHistogram::from_image(image);
            let (palette, mut report) = run_wsm(&hist, k, &term, seed)?;
            report.elapsed = started.elapsed();
            (palette, report)
        }
    };
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::RgbColor;

    fn gradient() -> RgbImage {
        RgbImage::from_fn(24, 16, |x, y| {
            RgbColor::new((x * 10) as u8, (y * 15) as u8, ((x + y) * 5) as u8)
        })
        .unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.id().parse::<Method>().unwrap(), m);
            assert_eq!(m.to_string(), m.id());
        }
        assert!(matches!("kmeans".parse::<Method>(), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn every_method_produces_at_most_k_colors() {
        let img = gradient();
        for m in Method::ALL {
            let (palette, report) = run(m, &img, 6, &MethodParams::default(), 3).unwrap();
            assert!(palette.len() <= 6, "{m}");
            assert!(!palette.is_empty(), "{m}");
            assert_eq!(report.method, m.id());
            assert_eq!(report.k, 6);
        }
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let img = gradient();
        for m in Method::ALL {
            let a = run(m, &img, 5, &MethodParams::default(), 11).unwrap().0;
            let b = run(m, &img, 5, &MethodParams::default(), 11).unwrap().0;
            assert_eq!(a, b, "{m}");
        }
    }

    #[test]
    fn fixed_variants_run_the_configured_iterations() {
        let img = gradient();
        let params = MethodParams {
            max_iters: 4,
            ..MethodParams::default()
        };
        for m in [Method::Km, Method::Fkm, Method::Wsm] {
            assert_eq!(run(m, &img, 5, &params, 0).unwrap().1.iterations, 4, "{m}");
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let img = gradient();
        assert!(matches!(
            run(Method::Wsm, &img, 0, &MethodParams::default(), 0),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(run(Method::Wsm, &img, 10_000, &MethodParams::default(), 0).is_err());
        let params = MethodParams {
            delta: 0.5,
            ..MethodParams::default()
        };
        assert!(matches!(
            run(Method::Pim, &img, 4, &params, 0),
            Err(Error::InvalidParameter(_))
        ));
    }
}
