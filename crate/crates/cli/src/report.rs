//! CLI error envelope: stable machine-readable codes plus exit classes.

use std::path::Path;

use serde_json::{json, Value};

use lamof_core::Error as CoreError;

const EXIT_INTERNAL: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;

pub struct CliError {
    code: String,
    message: String,
    context: Value,
    exit: u8,
}

fn code_for(err: &CoreError) -> &'static str {
    match err {
        CoreError::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
        CoreError::NonFinite(_) => "NON_FINITE",
        CoreError::EmptyMotion => "EMPTY_MOTION",
        CoreError::InvalidFps(_) => "INVALID_FPS",
        CoreError::InvalidSkeleton(_) => "INVALID_SKELETON",
        CoreError::DegenerateRotation(_) => "DEGENERATE_ROTATION",
        CoreError::NotARotation { .. } => "NOT_A_ROTATION",
        CoreError::TooFewSamples { .. } => "TOO_FEW_SAMPLES",
        CoreError::EvenWindow(_) => "EVEN_WINDOW",
        CoreError::SingleSegment => "SINGLE_SEGMENT",
        CoreError::ShapeMismatch { .. } => "SHAPE_MISMATCH",
        CoreError::WrongRepresentation { .. } => "WRONG_REPRESENTATION",
        CoreError::NoFootJoints => "NO_FOOT_JOINTS",
        CoreError::FrameCountMismatch { .. } => "FRAME_COUNT_MISMATCH",
        CoreError::TooShortForTransition { .. } => "TOO_SHORT_FOR_TRANSITION",
        CoreError::RepresentationMismatch(_) => "REPRESENTATION_MISMATCH",
        CoreError::EmptyPrompt => "EMPTY_PROMPT",
        CoreError::BadClipLength(_) => "BAD_CLIP_LENGTH",
        CoreError::Infeasible { .. } => "INFEASIBLE_DURATION",
        CoreError::LengthMismatch { .. } => "LENGTH_MISMATCH",
        CoreError::BadMagic { .. } => "BAD_MAGIC",
        CoreError::VersionUnsupported(_) => "VERSION_UNSUPPORTED",
        CoreError::TruncatedFile { .. } => "TRUNCATED_FILE",
        CoreError::ChecksumMismatch { .. } => "CHECKSUM_MISMATCH",
        CoreError::CorruptPayload(_) => "CORRUPT_PAYLOAD",
        CoreError::Io(_) => "IO_ERROR",
        CoreError::Json(_) => "JSON_ERROR",
    }
}

impl CliError {
    pub fn bad_input(code: &str, message: impl Into<String>, context: Value) -> Self {
        CliError {
            code: code.to_string(),
            message: message.into(),
            context,
            exit: EXIT_BAD_INPUT,
        }
    }

    /// Domain or validation failure while computing: bad input.
    pub fn bad_input_core(err: CoreError) -> Self {
        CliError {
            code: code_for(&err).to_string(),
            message: err.to_string(),
            context: Value::Null,
            exit: EXIT_BAD_INPUT,
        }
    }

    /// Failure while reading a named input file: bad input.
    pub fn from_core(err: CoreError, path: &Path) -> Self {
        CliError {
            code: code_for(&err).to_string(),
            message: err.to_string(),
            context: json!({"path": path}),
            exit: EXIT_BAD_INPUT,
        }
    }

    /// Failure while producing output: internal.
    pub fn internal(err: CoreError, path: &Path) -> Self {
        CliError {
            code: code_for(&err).to_string(),
            message: err.to_string(),
            context: json!({"path": path}),
            exit: EXIT_INTERNAL,
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.exit
    }

    pub fn to_json(&self) -> String {
        json!({
            "code": self.code,
            "message": self.message,
            "context": self.context,
        })
        .to_string()
    }
}
