//! Shared fixtures for the criterion benchmarks under `benches/`.

use std::path::Path;

use sortmeans::imageio::load_ppm;
use sortmeans::RgbImage;

/// Loads an image from the workspace `testdata/` directory.
pub fn testdata(name: &str) -> RgbImage {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../testdata").join(name);
    load_ppm(&path).unwrap_or_else(|e| panic!("loading {}: {e}", path.display()))
}
