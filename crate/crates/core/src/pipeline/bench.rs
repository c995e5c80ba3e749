//! Latency benchmarking.
//!
//! Report arithmetic lives in [`LatencyReport::from_samples`], a pure
//! function of the per-frame timings, so it can be checked against known
//! stage times without depending on the scheduler.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::detector::DetectorBackend;
use crate::model::Frame;
use crate::pipeline::run::{Pipeline, PipelineError, StageTimings};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
}

impl StageStats {
    /// Mean plus nearest-rank percentiles. `values` must be non-empty.
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite timing"));
        Self {
            mean_ms: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p50_ms: nearest_rank(&sorted, 50.0),
            p95_ms: nearest_rank(&sorted, 95.0),
        }
    }
}

fn nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// The configuration overhead is measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub name: String,
    pub mean_total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub config: String,
    pub samples: usize,
    pub denoise: StageStats,
    pub tuned_detect: StageStats,
    pub raw_detect: StageStats,
    pub combine: StageStats,
    pub total: StageStats,
    /// `1000 / total.mean_ms`
    pub fps: f64,
    pub baseline: Baseline,
    /// `(total - baseline) / baseline * 100`
    pub overhead_pct: f64,
}

impl LatencyReport {
    /// Without a baseline the report is its own baseline (0% overhead).
    pub fn from_samples(
        config: impl Into<String>,
        samples: &[StageTimings],
        baseline: Option<Baseline>,
    ) -> Result<Self, PipelineError> {
        if samples.is_empty() {
            return Err(PipelineError::EmptyInput);
        }
        let config = config.into();
        let stat = |f: fn(&StageTimings) -> f64| StageStats::of(&samples.iter().map(f).collect::<Vec<_>>());
        let total = stat(|t| t.total_ms);
        let baseline = baseline.unwrap_or_else(|| Baseline {
            name: config.clone(),
            mean_total_ms: total.mean_ms,
        });
        if baseline.mean_total_ms.is_nan() || baseline.mean_total_ms <= 0.0 {
            return Err(PipelineError::InvalidConfig(format!(
                "baseline {} has non-positive latency {}",
                baseline.name, baseline.mean_total_ms
            )));
        }
        Ok(Self {
            samples: samples.len(),
            denoise: stat(|t| t.denoise_ms),
            tuned_detect: stat(|t| t.tuned_detect_ms),
            raw_detect: stat(|t| t.raw_detect_ms),
            combine: stat(|t| t.combine_ms),
            fps: 1000.0 / total.mean_ms,
            overhead_pct: (total.mean_ms - baseline.mean_total_ms) / baseline.mean_total_ms * 100.0,
            total,
            baseline,
            config,
        })
    }

    /// Whole frames per second, rounded down.
    pub fn fps_floor(&self) -> u64 {
        self.fps.floor() as u64
    }

    /// Summary in the usual table layout, e.g. `26 ms (+23.8%) / 38 FPS`.
    pub fn table_cell(&self) -> String {
        format!(
            "{:.0} ms ({:+.1}%) / {} FPS",
            self.total.mean_ms,
            self.overhead_pct,
            self.fps_floor()
        )
    }
}

/// Runs every frame through the pipeline `repetitions` times.
pub fn benchmark(
    pipeline: &mut Pipeline,
    frames: &[Frame],
    repetitions: usize,
    baseline: Option<Baseline>,
) -> Result<LatencyReport, PipelineError> {
    let samples = collect_samples(pipeline, frames, repetitions)?;
    LatencyReport::from_samples(pipeline.name().to_owned(), &samples, baseline)
}

pub fn collect_samples(
    pipeline: &mut Pipeline,
    frames: &[Frame],
    repetitions: usize,
) -> Result<Vec<StageTimings>, PipelineError> {
    check_input(frames, repetitions)?;
    let mut samples = Vec::with_capacity(frames.len() * repetitions);
    for _ in 0..repetitions {
        for frame in frames {
            samples.push(pipeline.run(frame)?.1);
        }
    }
    Ok(samples)
}

/// Mean per-frame latency of a bare detector, for use as a baseline.
pub fn measure_baseline<B: DetectorBackend + ?Sized>(
    name: impl Into<String>,
    backend: &mut B,
    frames: &[Frame],
    repetitions: usize,
) -> Result<Baseline, PipelineError> {
    check_input(frames, repetitions)?;
    let mut sum = 0.0;
    for _ in 0..repetitions {
        for frame in frames {
            let t0 = Instant::now();
            backend.detect(frame).map_err(|source| PipelineError::Stage {
                stage: crate::pipeline::Stage::RawDetect,
                source,
            })?;
            sum += t0.elapsed().as_secs_f64() * 1000.0;
        }
    }
    Ok(Baseline {
        name: name.into(),
        mean_total_ms: sum / (frames.len() * repetitions) as f64,
    })
}

fn check_input(frames: &[Frame], repetitions: usize) -> Result<(), PipelineError> {
    if frames.is_empty() {
        return Err(PipelineError::EmptyInput);
    }
    if repetitions == 0 {
        return Err(PipelineError::InvalidConfig("repetitions must be at least 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(denoise: f64, detect: f64) -> StageTimings {
        StageTimings {
            denoise_ms: denoise,
            tuned_detect_ms: detect,
            raw_detect_ms: detect,
            combine_ms: 0.0,
            total_ms: denoise + detect,
        }
    }

    fn baseline(ms: f64) -> Option<Baseline> {
        Some(Baseline {
            name: "raw".into(),
            mean_total_ms: ms,
        })
    }

    #[test]
    fn known_table_rows() {
        let cases = [
            (5.0, 21.0, 21.0, "26 ms (+23.8%) / 38 FPS"),
            (5.0, 32.0, 32.0, "37 ms (+15.6%) / 27 FPS"),
            (4.0, 26.0, 26.0, "30 ms (+15.4%) / 33 FPS"),
            (4.0, 16.0, 16.0, "20 ms (+25.0%) / 50 FPS"),
        ];
        for (d, t, b, cell) in cases {
            let r = LatencyReport::from_samples("p", &[sample(d, t)], baseline(b)).unwrap();
            assert_eq!(r.table_cell(), cell);
        }
    }

    #[test]
    fn self_baseline_has_zero_overhead() {
        let r = LatencyReport::from_samples("p", &[sample(5.0, 21.0), sample(5.0, 23.0)], None).unwrap();
        assert_eq!(r.overhead_pct, 0.0);
        assert_eq!(r.baseline.name, "p");
        assert_eq!(r.total.mean_ms, 27.0);
        assert_eq!(r.fps, 1000.0 / 27.0);
    }

    #[test]
    fn percentiles_use_nearest_rank() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        let s = StageStats::of(&v);
        assert_eq!(s.p50_ms, 10.0);
        assert_eq!(s.p95_ms, 19.0);
        assert_eq!(s.mean_ms, 10.5);
        assert_eq!(StageStats::of(&[3.0]).p95_ms, 3.0);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            LatencyReport::from_samples("p", &[], None),
            Err(PipelineError::EmptyInput)
        ));
    }
}
