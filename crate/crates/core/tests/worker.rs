use std::time::Duration;

use flarebench::detector::{BackendError, DetectorBackend, ExternalDetector, WorkerClient};
use flarebench::pipeline::{
    chroma_clamp_denoise, ChromaClampConfig, DenoiserSpec, DetectorSpec, PipelineConfig, WorkerCommand,
};
use flarebench::{Frame, ObjectClass};

fn worker(args: &[&str]) -> Vec<String> {
    std::iter::once(env!("CARGO_BIN_EXE_flarebench-worker"))
        .chain(args.iter().copied())
        .map(str::to_owned)
        .collect()
}

fn flare() -> Frame {
    let mut f = Frame::filled(16, 16, [20, 20, 20]).unwrap();
    for y in 4..12 {
        for x in 4..12 {
            f.set_pixel(x, y, [60, 60, 255]);
        }
    }
    f.with_position(3, 100)
}

#[test]
fn handshake_reports_capabilities() {
    let d = ExternalDetector::spawn(&worker(&["--car-box", "0,0,8,8"]), Duration::from_secs(5)).unwrap();
    assert_eq!(d.capabilities().name, "reference-worker");
    assert_eq!(d.capabilities().classes, vec![ObjectClass::Car]);
}

#[test]
fn denoise_over_the_wire_matches_in_process() {
    let mut c = WorkerClient::spawn(&worker(&["--car-box", "0,0,8,8"]), Duration::from_secs(5)).unwrap();
    let f = flare();
    let out = c.denoise(&f).unwrap();
    assert_eq!(out, chroma_clamp_denoise(&f, &ChromaClampConfig::default()));
    assert_eq!((out.index, out.timestamp_ms), (3, 100));
}

#[test]
fn crashed_worker_poisons_the_client() {
    let mut c = WorkerClient::spawn(
        &worker(&["--car-box", "0,0,8,8", "--mode", "crash"]),
        Duration::from_secs(5),
    )
    .unwrap();
    assert!(matches!(c.detect(&flare()), Err(BackendError::WorkerCrashed(_))));
    assert!(matches!(c.detect(&flare()), Err(BackendError::WorkerCrashed(_))));
}

#[test]
fn timeout_poisons_the_client() {
    let mut c = WorkerClient::spawn(
        &worker(&["--car-box", "0,0,8,8", "--mode", "stall"]),
        Duration::from_millis(150),
    )
    .unwrap();
    assert_eq!(c.detect(&flare()), Err(BackendError::WorkerTimeout { timeout_ms: 150 }));
    assert!(matches!(c.detect(&flare()), Err(BackendError::WorkerCrashed(_))));
}

#[test]
fn missing_program_is_a_spawn_error() {
    let got = WorkerClient::spawn(&["/nonexistent/worker".to_owned()], Duration::from_secs(1));
    assert!(matches!(got, Err(BackendError::Spawn(_))));
    assert!(matches!(
        WorkerClient::spawn(&[], Duration::from_secs(1)),
        Err(BackendError::Config(_))
    ));
}

#[test]
fn bad_worker_arguments_fail_the_handshake() {
    let got = WorkerClient::spawn(&worker(&["--mode", "normal"]), Duration::from_secs(5));
    assert!(matches!(got, Err(BackendError::WorkerCrashed(_))), "{:?}", got.err());
}

#[test]
fn pipeline_with_external_slots_matches_in_process() {
    let cmd = WorkerCommand::Argv(worker(&["--car-box", "2,2,14,14"]));
    let external = PipelineConfig {
        name: None,
        denoiser: DenoiserSpec::External { cmd: cmd.clone() },
        raw_detector: DetectorSpec::External { cmd: cmd.clone() },
        tuned_detector: DetectorSpec::External { cmd },
        combiner: Default::default(),
    };
    let local = PipelineConfig {
        name: None,
        denoiser: DenoiserSpec::ChromaClamp {
            config: ChromaClampConfig::default(),
        },
        raw_detector: DetectorSpec::Reference {
            car_box: Some([2.0, 2.0, 14.0, 14.0]),
            params: Default::default(),
        },
        tuned_detector: DetectorSpec::Reference {
            car_box: Some([2.0, 2.0, 14.0, 14.0]),
            params: Default::default(),
        },
        combiner: Default::default(),
    };
    let t = Duration::from_secs(5);
    let mut a = external.build(None, t).unwrap();
    let mut b = local.build(None, t).unwrap();
    let f = flare();
    assert_eq!(a.run(&f).unwrap().0, b.run(&f).unwrap().0);
}
