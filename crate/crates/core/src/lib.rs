//! Color quantization built around weighted sort-means clustering.
//!
//! The pipeline has two phases. Palette design reduces an image to `K`
//! representative colors; pixel mapping replaces every pixel by its nearest
//! palette entry. [`cluster::run_wsm`] designs the palette by running batch
//! k-means over the image's unique colors, each weighted by its pixel
//! frequency, and prunes the nearest-center search with the triangle
//! inequality over sorted inter-center distances. The pruning is exact: the
//! memberships it produces are identical to an exhaustive scan.
//!
//! The [`baselines`] module carries the classic comparators (median cut,
//! variance-based and Wu splitting, modified min-max, fuzzy c-means and its
//! partition-index variant, finite-state and stable-flags k-means) and
//! [`method`] exposes all of them behind one uniform entry point.

pub mod baselines;
pub mod cluster;
pub mod error;
pub mod histogram;
pub mod imageio;
pub mod method;
pub mod metrics;
pub mod rng;
pub mod samples;

pub use cluster::{ClusterState, Palette, RunReport, Termination, TerminationMode};
pub use error::{Error, Result};
pub use histogram::{ColorHistogram, HistogramEntry, UniversalHashParams};
pub use imageio::{RgbColor, RgbImage};
pub use method::{Method, MethodParams};
pub use metrics::{BenchSummary, RunRecord};
pub use samples::Samples;
