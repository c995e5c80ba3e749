use std::thread;
use std::time::Duration;

use flarebench::detector::{BackendError, Capabilities, DetectorBackend};
use flarebench::pipeline::{benchmark, CombinerConfig, Denoiser, IdentityDenoiser, Pipeline, PipelineError};
use flarebench::{Detection, Frame};

struct Sleepy {
    delay: Duration,
    caps: Capabilities,
}

impl Sleepy {
    fn boxed(ms: u64) -> Box<Self> {
        Box::new(Self {
            delay: Duration::from_millis(ms),
            caps: Capabilities {
                name: format!("sleep{ms}"),
                classes: vec![],
                expected_resolution: None,
            },
        })
    }
}

impl DetectorBackend for Sleepy {
    fn capabilities(&self) -> &Capabilities {
        &self.caps
    }

    fn detect(&mut self, _: &Frame) -> Result<Vec<Detection>, BackendError> {
        thread::sleep(self.delay);
        Ok(vec![])
    }
}

struct SleepyDenoiser(Duration);

impl Denoiser for SleepyDenoiser {
    fn name(&self) -> &str {
        "sleepy"
    }

    fn denoise(&mut self, frame: &Frame) -> Result<Frame, BackendError> {
        thread::sleep(self.0);
        Ok(frame.clone())
    }
}

fn frames(n: usize) -> Vec<Frame> {
    vec![Frame::filled(4, 4, [0; 3]).unwrap(); n]
}

#[test]
fn ten_ms_stage_measures_ten_ms() {
    let mut p = Pipeline::new(
        "sleep",
        Box::new(IdentityDenoiser),
        Sleepy::boxed(10),
        Sleepy::boxed(1),
        CombinerConfig::default(),
    )
    .unwrap();
    let r = benchmark(&mut p, &frames(10), 3, None).unwrap();
    assert_eq!(r.samples, 30);
    assert!((r.raw_detect.mean_ms - 10.0).abs() <= 2.0, "{:?}", r.raw_detect);
    assert!((r.total.mean_ms - 10.0).abs() <= 2.0, "{:?}", r.total);
    assert!((r.fps - 100.0).abs() <= 20.0, "fps {}", r.fps);
    assert_eq!(r.fps, 1000.0 / r.total.mean_ms);
    assert_eq!(r.overhead_pct, 0.0);
}

#[test]
fn paths_overlap() {
    // denoise 5 + tuned 21 runs alongside raw 21: about 26 ms, not 47
    let mut p = Pipeline::new(
        "overlap",
        Box::new(SleepyDenoiser(Duration::from_millis(5))),
        Sleepy::boxed(21),
        Sleepy::boxed(21),
        CombinerConfig::default(),
    )
    .unwrap();
    let r = benchmark(&mut p, &frames(5), 2, None).unwrap();
    assert!((r.total.mean_ms - 26.0).abs() <= 3.0, "{:?}", r.total);
    for s in [&r.denoise, &r.tuned_detect, &r.raw_detect, &r.combine] {
        assert!(r.total.mean_ms >= s.mean_ms);
    }
}

#[test]
fn empty_input_and_zero_repetitions_are_rejected() {
    let mut p = Pipeline::new(
        "x",
        Box::new(IdentityDenoiser),
        Sleepy::boxed(0),
        Sleepy::boxed(0),
        CombinerConfig::default(),
    )
    .unwrap();
    assert!(matches!(
        benchmark(&mut p, &[], 1, None),
        Err(PipelineError::EmptyInput)
    ));
    assert!(matches!(
        benchmark(&mut p, &frames(1), 0, None),
        Err(PipelineError::InvalidConfig(_))
    ));
}
