use alloc::string::String;

/// Errors raised by the recognition pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("invalid label space: {0}")]
    InvalidLabelSpace(String),
    #[error("label index {index} out of range for {count} labels")]
    InvalidLabel { index: usize, count: usize },
    #[error("unknown label name {0:?}")]
    UnknownLabel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not a binary PPM (P6) file")]
    PpmBadMagic,
    #[error("malformed PPM header: {0}")]
    PpmBadHeader(&'static str),
    #[error("unsupported PPM maxval {0}, only 255 is accepted")]
    PpmMaxval(u32),
    #[error("unexpected end of pixel data")]
    PpmTruncated,
    #[error("pixel buffer holds {found} bytes, expected {expected}")]
    ImageBuffer { expected: usize, found: usize },

    #[error("video has no frames")]
    EmptyVideo,
    #[error("frame {index} is {found:?}, expected {expected:?} (width, height, channels)")]
    FrameSize {
        index: usize,
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },
    #[error("no stable region found")]
    NoStableRegion,
    #[error("template does not fit the target at any scale")]
    NoValidScale,

    #[error("{format}: bad magic")]
    BadMagic { format: &'static str },
    #[error("{format}: unsupported version {version}")]
    UnsupportedVersion { format: &'static str, version: u16 },
    #[error("{format}: truncated header")]
    TruncatedHeader { format: &'static str },
    #[error("{format}: invalid header: {reason}")]
    InvalidHeader {
        format: &'static str,
        reason: &'static str,
    },
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("{found} trailing bytes after payload")]
    TrailingBytes { found: usize },

    #[error("training data holds a single class")]
    SingleClass,
    #[error("cross-validation needs at least {needed} videos, found {found}; pass explicit hyperparameters instead")]
    NotEnoughVideos { needed: usize, found: usize },
    #[error("frame {index} outside the change-feature band [{d}, {len} - 1 - {d}]")]
    OutOfBand { index: usize, d: usize, len: usize },
    #[error("lambda must be non-negative")]
    NegativeLambda,
    #[error("cluster count {k} outside [1, {n}]")]
    ClusterCount { k: usize, n: usize },
    #[error("metric undefined: {0}")]
    MetricUndefined(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
