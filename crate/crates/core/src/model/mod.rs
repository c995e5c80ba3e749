//! Shared domain types: frames, sequences, boxes, detections and
//! confidence signals.

mod detection;
mod frame;
mod geometry;
pub mod ppm;
pub mod sequence_io;
mod signal;

use std::path::{Path, PathBuf};

pub use detection::{Detection, ObjectClass};
pub use frame::{mean_brightness, timestamp_for, Frame, Rgb, VideoSequence};
pub use geometry::{iou, BoundingBox};
pub use signal::{ConfidenceSignal, GapPolicy};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid bounding box {0}")]
    InvalidBox(String),
    #[error("confidence {0} is outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("malformed PPM: {0}")]
    Ppm(String),
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ModelError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ModelError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
