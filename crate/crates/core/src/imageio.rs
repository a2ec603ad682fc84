//! Raster images, the binary PPM codec, pixel mapping and error images.

use std::fmt::Write as _;

use crate::cluster::Palette;
use crate::error::{Error, Result};

/// An 8-bit RGB color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RgbColor {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl RgbColor {
    pub const BLACK: RgbColor = RgbColor::new(0, 0, 0);
    pub const WHITE: RgbColor = RgbColor::new(255, 255, 255);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub fn to_f64(self) -> [f64; 3] {
        [f64::from(self.r), f64::from(self.g), f64::from(self.b)]
    }

    pub fn to_array(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    /// Packs the color into the low 24 bits of a `u32` as `0xRRGGBB`.
    pub fn packed(self) -> u32 {
        (u32::from(self.r) << 16) | (u32::from(self.g) << 8) | u32::from(self.b)
    }

    /// Rounds a real-valued color to the nearest 8-bit color, clamping to `[0, 255]`.
    pub fn from_f64_rounded(c: [f64; 3]) -> Self {
        let q = |v: f64| v.round().clamp(0.0, 255.0) as u8;
        Self::new(q(c[0]), q(c[1]), q(c[2]))
    }

    pub fn distance_squared(self, other: RgbColor) -> u32 {
        let dr = i32::from(self.r) - i32::from(other.r);
        let dg = i32::from(self.g) - i32::from(other.g);
        let db = i32::from(self.b) - i32::from(other.b);
        (dr * dr + dg * dg + db * db) as u32
    }
}

impl From<[u8; 3]> for RgbColor {
    fn from([r, g, b]: [u8; 3]) -> Self {
        Self { r, g, b }
    }
}

/// A `width` x `height` raster of RGB pixels in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<RgbColor>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<RgbColor>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::MalformedHeader(format!("{width}x{height} overflows")))?;
        if pixels.len() != expected {
            return Err(Error::PixelCountMismatch {
                width,
                height,
                expected,
                found: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// An image filled with a single color.
    pub fn filled(width: usize, height: usize, color: RgbColor) -> Result<Self> {
        Self::new(width, height, vec![color; width.saturating_mul(height)])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> RgbColor,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[RgbColor] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> RgbColor {
        self.pixels[y * self.width + x]
    }

    fn check_same_size(&self, other: &RgbImage) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }
}

/// Reads a header token, skipping whitespace and `#` comments. Returns the
/// token and the offset just past it.
fn next_token(bytes: &[u8], mut pos: usize) -> Option<(&[u8], usize)> {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' && bytes[pos] != b'\r' {
                pos += 1;
            }
            continue;
        }
        break;
    }
    let start = pos;
    while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
        pos += 1;
    }
    (pos > start).then(|| (&bytes[start..pos], pos))
}

fn parse_header_value(bytes: &[u8], pos: usize, what: &str) -> Result<(u32, usize)> {
    let (tok, next) =
        next_token(bytes, pos).ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
    let text = std::str::from_utf8(tok)
        .map_err(|_| Error::MalformedHeader(format!("non-ASCII {what}")))?;
    let value = text
        .parse::<u32>()
        .map_err(|_| Error::MalformedHeader(format!("invalid {what} '{text}'")))?;
    Ok((value, next))
}

/// Decodes a binary (P6) PPM with maxval 255.
pub fn read_ppm(bytes: &[u8]) -> Result<RgbImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(Error::BadMagic);
    }
    let pos = 2;
    if bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
        return Err(Error::BadMagic);
    }
    let (width, pos) = parse_header_value(bytes, pos, "width")?;
    let (height, pos) = parse_header_value(bytes, pos, "height")?;
    let (maxval, pos) = parse_header_value(bytes, pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => {}
        _ => {
            return Err(Error::MalformedHeader(
                "missing whitespace after maxval".into(),
            ))
        }
    }
    let payload = &bytes[pos + 1..];
    let (width, height) = (width as usize, height as usize);
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::MalformedHeader(format!("{width}x{height} overflows")))?;
    if payload.len() < expected {
        return Err(Error::TruncatedPixels {
            expected,
            found: payload.len(),
        });
    }
    let pixels = payload[..expected]
        .chunks_exact(3)
        .map(|c| RgbColor::new(c[0], c[1], c[2]))
        .collect();
    RgbImage::new(width, height, pixels)
}

/// Encodes as `P6\n<w> <h>\n255\n` followed by the raw pixel bytes.
pub fn write_ppm(image: &RgbImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", image.width, image.height);
    let mut out = Vec::with_capacity(header.len() + image.pixels.len() * 3);
    out.extend_from_slice(header.as_bytes());
    for p in &image.pixels {
        out.extend_from_slice(&p.to_array());
    }
    out
}

pub fn load_ppm(path: impl AsRef<std::path::Path>) -> Result<RgbImage> {
    read_ppm(&std::fs::read(path)?)
}

pub fn save_ppm(path: impl AsRef<std::path::Path>, image: &RgbImage) -> Result<()> {
    std::fs::write(path, write_ppm(image))?;
    Ok(())
}

/// Index of the palette color nearest to `color`, lowest index on ties.
fn nearest_index(color: RgbColor, palette: &[RgbColor]) -> usize {
    let mut best = 0;
    let mut best_dist = u32::MAX;
    for (k, c) in palette.iter().enumerate() {
        let d = color.distance_squared(*c);
        if d < best_dist {
            best_dist = d;
            best = k;
        }
    }
    best
}

/// Replaces every pixel by the nearest entry of the rounded palette.
pub fn map_pixels(image: &RgbImage, palette: &Palette) -> Result<RgbImage> {
    if palette.is_empty() {
        return Err(Error::EmptyPalette);
    }
    let rounded = palette.rounded();
    // Natural images repeat colors heavily; memoize by packed color.
    let mut cache: std::collections::HashMap<u32, RgbColor> = std::collections::HashMap::new();
    let pixels = image
        .pixels
        .iter()
        .map(|&p| {
            *cache
                .entry(p.packed())
                .or_insert_with(|| rounded[nearest_index(p, &rounded)])
        })
        .collect();
    RgbImage::new(image.width, image.height, pixels)
}

/// Renders `255 - min(255, 4 |orig - quant|)` per channel.
pub fn error_image(original: &RgbImage, quantized: &RgbImage) -> Result<RgbImage> {
    original.check_same_size(quantized)?;
    let channel = |a: u8, b: u8| 255 - (4 * u32::from(a.abs_diff(b))).min(255) as u8;
    let pixels = original
        .pixels
        .iter()
        .zip(&quantized.pixels)
        .map(|(o, q)| RgbColor::new(channel(o.r, q.r), channel(o.g, q.g), channel(o.b, q.b)))
        .collect();
    RgbImage::new(original.width, original.height, pixels)
}

/// Serializes a palette as one `R G B` line per center, in index order.
pub fn write_palette(palette: &Palette) -> String {
    let mut out = String::new();
    for c in palette.centers() {
        let _ = writeln!(out, "{} {} {}", c[0], c[1], c[2]);
    }
    out
}

pub fn read_palette(text: &str) -> Result<Palette> {
    let mut centers = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidPalette(format!("line {}: {e}", lineno + 1)))?;
        let [r, g, b] = values[..] else {
            return Err(Error::InvalidPalette(format!(
                "line {}: expected 3 values, found {}",
                lineno + 1,
                values.len()
            )));
        };
        centers.push([r, g, b]);
    }
    Palette::new(centers)
}
