//! Tooling for measuring how emergency-vehicle flashers disturb object
//! detector confidence, and for running the dual-path mitigation pipeline.
//!
//! - [`sim`] renders flasher video with exact ground truth.
//! - [`detector`] holds the detector interface, the flare-sensitive
//!   reference detector and the subprocess worker client.
//! - [`analysis`] turns per-frame detections into confidence signals and
//!   measures them (metrics, spectrum, detection-loss curve, tonal
//!   histograms, IoU tracking).
//! - [`pipeline`] is the denoiser / dual detector / combiner pipeline with
//!   latency benchmarking.
//! - [`augmentation`] splits image folders into day and night and adds
//!   synthetic flasher glare to the night images.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the detectors and file formats use.

pub mod analysis;
pub mod augmentation;
pub mod detector;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod seed;
pub mod sim;

pub use model::{iou, mean_brightness, Frame, ModelError, ObjectClass, Rgb, VideoSequence};
pub use scalar::Scalar;

pub type BoundingBox = model::BoundingBox<f64>;
pub type Detection = model::Detection<f64>;
pub type ConfidenceSignal = model::ConfidenceSignal<f64>;
pub type SignalMetrics = analysis::SignalMetrics<f64>;
pub type DetectionLossCurve = analysis::DetectionLossCurve<f64>;
pub type Spectrum = analysis::Spectrum<f64>;
pub type SpectrumPeak = analysis::SpectrumPeak<f64>;

pub type BoundingBox32 = model::BoundingBox<f32>;
pub type Detection32 = model::Detection<f32>;
pub type ConfidenceSignal32 = model::ConfidenceSignal<f32>;
pub type SignalMetrics32 = analysis::SignalMetrics<f32>;
pub type Spectrum32 = analysis::Spectrum<f32>;

/// Version string recorded in report provenance.
pub const TOOL_VERSION: &str = concat!("flarebench ", env!("CARGO_PKG_VERSION"));
