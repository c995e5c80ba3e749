//! The dual-path mitigation pipeline.
//!
//! Per frame: the denoiser cleans the frame, the tuned detector runs on the
//! cleaned frame, the raw detector runs on the original, and the combiner
//! merges both detection lists while keeping every raw detection.

pub mod bench;
pub mod combine;
pub mod config;
pub mod denoise;
mod run;

pub use bench::{benchmark, measure_baseline, Baseline, LatencyReport, StageStats};
pub use combine::{combine, combine_traced, CombinedDetection, CombinerConfig};
pub use config::{DenoiserSpec, DetectorSpec, PipelineConfig, WorkerCommand};
pub use denoise::{
    chroma_clamp_denoise, ChromaClampConfig, ChromaClampDenoiser, Denoiser, ExternalDenoiser, IdentityDenoiser,
};
pub use run::{Pipeline, PipelineError, Stage, StageTimings};
