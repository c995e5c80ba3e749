//! Confidence-signal analyses: extraction, summary metrics, spectrum,
//! detection-loss curve, tonal histograms and IoU tracking.

mod extract;
pub mod loss;
pub mod metrics;
pub mod spectrum;
pub mod tonal;
pub mod track;

use crate::model::ModelError;

pub use extract::{extract_signal, REACQUIRE_IOU};
pub use loss::{detection_loss, detection_loss_of, DetectionLossCurve};
pub use metrics::{compute_metrics, metrics_of, SignalMetrics, METRIC_THRESHOLDS_PCT};
pub use spectrum::{spectrum, spectrum_of, DominantPeak, Spectrum, SpectrumPeak};
pub use tonal::{histogram_l1, tonal_histogram, TonalHistogram};
pub use track::{iou_track, Track, TrackObservation};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("signal is empty")]
    EmptySignal,
    #[error("no {0} detection in any frame")]
    NoTarget(String),
    #[error("spectrum needs at least {need} samples, got {got}")]
    InsufficientSamples { got: usize, need: usize },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
