//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors returned by motion, codec, metric, stitch, application, and file
/// operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix, pose, or feature vector has the wrong dimensions.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Input data contains NaN or infinite entries.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A motion sequence must contain at least one frame.
    #[error("motion sequence has no frames")]
    EmptyMotion,

    /// Frame rate must be strictly positive and finite.
    #[error("invalid frame rate {0}")]
    InvalidFps(f64),

    /// Skeleton hierarchy violates its invariants.
    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),

    /// The first 6D column is numerically zero or the two columns are parallel.
    #[error("degenerate 6d rotation: {0}")]
    DegenerateRotation(&'static str),

    /// The matrix is not orthonormal with determinant +1 within tolerance.
    #[error("matrix is not a rotation (orthonormality deviation {deviation:.3e})")]
    NotARotation { deviation: f64 },

    /// Fewer samples than requested clusters.
    #[error("too few samples for clustering: {samples} < k = {k}")]
    TooFewSamples { samples: usize, k: usize },

    /// Label smoothing window must be odd.
    #[error("smoothing window must be odd, got {0}")]
    EvenWindow(usize),

    /// Operation requires at least two supermotion segments.
    #[error("operation requires at least two segments")]
    SingleSegment,

    /// Two values that must agree in shape do not.
    #[error("shape mismatch in {context}: {left} vs {right}")]
    ShapeMismatch {
        context: &'static str,
        left: String,
        right: String,
    },

    /// Operation requires a different coordinate representation.
    #[error("wrong representation for {context}: expected {expected}")]
    WrongRepresentation {
        context: &'static str,
        expected: &'static str,
    },

    /// Contact and skating metrics need at least one foot joint.
    #[error("skeleton defines no foot joints")]
    NoFootJoints,

    /// Frame totals of two inputs that must agree do not.
    #[error("frame count mismatch: {left} vs {right}")]
    FrameCountMismatch { left: usize, right: usize },

    /// Both clips must be longer than the transition window.
    #[error("clip too short for transition: min length {min_len} <= transition {transition}")]
    TooShortForTransition { min_len: usize, transition: usize },

    /// Stitch inputs disagree in representation, joint count, or frame rate.
    #[error("representation mismatch: {0}")]
    RepresentationMismatch(String),

    /// Prompt rewriting requires a non-empty prompt.
    #[error("empty prompt")]
    EmptyPrompt,

    /// Clip list violates the configured count or length bounds.
    #[error("bad clip length: {0}")]
    BadClipLength(String),

    /// No duration plan exists within the requested bounds.
    #[error("infeasible duration decomposition: D={total}, M={segments}, bounds [{d_min}, {d_max}]")]
    Infeasible {
        total: usize,
        segments: usize,
        d_min: usize,
        d_max: usize,
    },

    /// Duration plan length does not match the segment count.
    #[error("duration plan length {plan} does not match segment count {segments}")]
    LengthMismatch { plan: usize, segments: usize },

    /// File does not start with the expected magic bytes.
    #[error("bad magic: expected {expected:?}, got {actual:?}")]
    BadMagic { expected: [u8; 4], actual: [u8; 4] },

    /// File format version is not supported by this build.
    #[error("unsupported format version {0}")]
    VersionUnsupported(u32),

    /// File is shorter (or longer) than its header declares.
    #[error("truncated file: expected {expected} bytes, got {actual}")]
    TruncatedFile { expected: usize, actual: usize },

    /// Stored checksum does not match the file contents.
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    /// Structurally valid file whose payload violates a format invariant.
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
