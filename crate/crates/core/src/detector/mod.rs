//! Detector interface and backends.

pub mod protocol;
pub mod reference;
pub mod worker;

use serde::{Deserialize, Serialize};

use crate::model::{Detection, Frame, ObjectClass};

pub use protocol::ProtocolError;
pub use reference::{flare_energy, reference_detect, ReferenceDetector, ReferenceDetectorConfig};
pub use worker::{ExternalDetector, WorkerClient};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capabilities {
    pub name: String,
    pub classes: Vec<ObjectClass>,
    /// `None` accepts any resolution.
    pub expected_resolution: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("worker did not answer within {timeout_ms} ms")]
    WorkerTimeout { timeout_ms: u64 },
    #[error("worker crashed: {0}")]
    WorkerCrashed(String),
    #[error("failed to start worker: {0}")]
    Spawn(String),
    #[error("worker reported: {0}")]
    Worker(String),
    #[error("backend config: {0}")]
    Config(String),
}

impl From<ProtocolError> for BackendError {
    fn from(e: ProtocolError) -> Self {
        BackendError::Protocol(e.0)
    }
}

/// Anything that turns a frame into detections.
pub trait DetectorBackend: Send {
    fn capabilities(&self) -> &Capabilities;
    fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection<f64>>, BackendError>;
}

impl<B: DetectorBackend + ?Sized> DetectorBackend for Box<B> {
    fn capabilities(&self) -> &Capabilities {
        (**self).capabilities()
    }

    fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection<f64>>, BackendError> {
        (**self).detect(frame)
    }
}

/// Runs a backend over every frame, in order.
pub fn detect_all<B: DetectorBackend + ?Sized>(
    backend: &mut B,
    frames: &[Frame],
) -> Result<Vec<Vec<Detection<f64>>>, BackendError> {
    frames.iter().map(|f| backend.detect(f)).collect()
}
