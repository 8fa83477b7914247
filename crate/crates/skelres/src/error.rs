use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("frame {frame}: expected {expected} joints, found {found}")]
    WrongJointCount {
        frame: usize,
        expected: usize,
        found: usize,
    },
    #[error("frame {frame}, joint {joint}: non-finite coordinate")]
    NonFiniteCoordinate { frame: usize, joint: usize },
    #[error("sequence has {0} frames, need at least 2")]
    TooFewFrames(usize),
    #[error("subject id {0} outside the valid range [1,10]")]
    BadSubjectId(u32),
    #[error("camera id {0:?} invalid for the cross-view protocol")]
    BadCameraId(Option<u32>),
    #[error("label {label} >= class count {classes}")]
    BadLabel { label: u32, classes: u32 },
    #[error("all coordinates identical; normalization range is degenerate")]
    DegenerateRange,
    #[error("part layout: {0}")]
    BadLayout(String),
    #[error("image is {found_h}x{found_w}, expected {want_h}x{want_w}")]
    WrongImageSize {
        found_h: usize,
        found_w: usize,
        want_h: usize,
        want_w: usize,
    },
    #[error("zero image dimension")]
    ZeroDimension,
    #[error("unsupported depth {0}; expected one of 20, 32, 44, 56, 110")]
    UnsupportedDepth(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dropout rate {0} must lie in [0, 1)")]
    BadDropoutRate(f64),
    #[error("batch normalization needs a batch of at least 2 in train mode")]
    BatchTooSmall,
    #[error("label row {0} is not one-hot")]
    NotOneHot(usize),
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error("checkpoint topology expects {expected} joints, input has {found}")]
    TopologyMismatch { expected: usize, found: usize },
    #[error("empty split")]
    EmptySplit,
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("manifest: {0}")]
    BadManifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("png: {0}")]
    Png(String),
}

pub type Result<T> = std::result::Result<T, Error>;
