use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic number: expected P6")]
    BadMagic,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0}: only 255 is supported")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    TruncatedPixels { expected: usize, found: usize },
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("pixel buffer holds {found} pixels but {width}x{height} requires {expected}")]
    PixelCountMismatch {
        width: usize,
        height: usize,
        expected: usize,
        found: usize,
    },
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("palette is empty")]
    EmptyPalette,
    #[error("invalid palette entry: {0}")]
    InvalidPalette(String),
    #[error("K = {k} is out of range: must be between 1 and {max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown method '{0}'")]
    UnknownMethod(String),
    #[error("score table is missing a value for method {method} in cell {cell}")]
    MissingCell { cell: usize, method: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
