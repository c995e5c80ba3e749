use std::fmt;
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::detector::{BackendError, DetectorBackend};
use crate::model::{Detection, Frame};
use crate::pipeline::combine::{combine, CombinerConfig};
use crate::pipeline::denoise::Denoiser;

/// Wall-clock milliseconds spent in each stage of one frame.
///
/// The raw and tuned paths run concurrently, so `total_ms` can be less than
/// the sum of the stages, but never less than any single stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub denoise_ms: f64,
    pub tuned_detect_ms: f64,
    pub raw_detect_ms: f64,
    pub combine_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Denoise,
    TunedDetect,
    RawDetect,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Denoise => "denoiser",
            Stage::TunedDetect => "tuned detector",
            Stage::RawDetect => "raw detector",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: BackendError,
    },
    #[error("no frames to process")]
    EmptyInput,
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
}

impl PipelineError {
    fn at(stage: Stage) -> impl FnOnce(BackendError) -> PipelineError {
        move |source| PipelineError::Stage { stage, source }
    }
}

/// Denoiser, tuned detector, raw detector and combiner.
pub struct Pipeline {
    name: String,
    denoiser: Box<dyn Denoiser>,
    raw: Box<dyn DetectorBackend>,
    tuned: Box<dyn DetectorBackend>,
    combiner: CombinerConfig,
}

impl Pipeline {
    pub fn new(
        name: impl Into<String>,
        denoiser: Box<dyn Denoiser>,
        raw: Box<dyn DetectorBackend>,
        tuned: Box<dyn DetectorBackend>,
        combiner: CombinerConfig,
    ) -> Result<Self, PipelineError> {
        combiner.validate().map_err(PipelineError::InvalidConfig)?;
        Ok(Self {
            name: name.into(),
            denoiser,
            raw,
            tuned,
            combiner,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn combiner(&self) -> &CombinerConfig {
        &self.combiner
    }

    /// Combined detections for one frame. The raw path runs on the calling
    /// thread while the denoise + tuned path runs on a scoped thread.
    pub fn run(&mut self, frame: &Frame) -> Result<(Vec<Detection<f64>>, StageTimings), PipelineError> {
        let start = Instant::now();
        let Self {
            denoiser, raw, tuned, ..
        } = self;

        let (tuned_out, raw_out) = thread::scope(|s| {
            let tuned_path = s.spawn(|| -> Result<_, PipelineError> {
                let t0 = Instant::now();
                let clean = denoiser.denoise(frame).map_err(PipelineError::at(Stage::Denoise))?;
                let t1 = Instant::now();
                let dets = tuned.detect(&clean).map_err(PipelineError::at(Stage::TunedDetect))?;
                Ok((dets, ms(t1 - t0), ms(t1.elapsed())))
            });
            let t0 = Instant::now();
            let raw_out = raw
                .detect(frame)
                .map_err(PipelineError::at(Stage::RawDetect))
                .map(|d| (d, ms(t0.elapsed())));
            (tuned_path.join().expect("tuned path panicked"), raw_out)
        });
        // raw-path errors take precedence: they are what the driver would see
        let (raw_dets, raw_detect_ms) = raw_out?;
        let (tuned_dets, denoise_ms, tuned_detect_ms) = tuned_out?;

        let c0 = Instant::now();
        let out = combine(&raw_dets, &tuned_dets, &self.combiner);
        let combine_ms = ms(c0.elapsed());
        let timings = StageTimings {
            denoise_ms,
            tuned_detect_ms,
            raw_detect_ms,
            combine_ms,
            total_ms: ms(start.elapsed()),
        };
        Ok((out, timings))
    }
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}
