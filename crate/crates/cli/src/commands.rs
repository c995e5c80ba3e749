use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use log::info;
use serde::de::DeserializeOwned;
use serde::Serialize;

use flarebench::augmentation::{build_augmented_dataset, AugmentationConfig};
use flarebench::detector::worker::timeout_from_env;
use flarebench::detector::{detect_all, DetectorBackend};
use flarebench::model::sequence_io::{self, write_json, MANIFEST_FILE};
use flarebench::pipeline::{benchmark, measure_baseline, DetectorSpec, PipelineConfig, StageTimings};
use flarebench::report::{self, analyze, AnalysisReport, Provenance};
use flarebench::seed::{derive, name_hash};
use flarebench::sim::{render_sequence, SimulationConfig, GROUND_TRUTH_FILE};
use flarebench::{BoundingBox, Detection, ObjectClass, VideoSequence, TOOL_VERSION};

use crate::error::CliError;
use crate::{Cli, Command};

/// The simulation config is copied next to the rendered frames so later
/// commands can recover the scene, e.g. the car box.
pub const SIMULATION_FILE: &str = "simulation.json";

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate { config } => simulate(cli, config),
        Command::Augment { input, config } => augment(cli, input, config.as_deref()),
        Command::Analyze {
            video,
            backend,
            roi,
            class,
        } => analyze_cmd(cli, video, backend, roi.as_deref(), class),
        Command::Compare { baseline, candidate } => compare(cli, baseline, candidate),
        Command::Bench {
            pipeline,
            video,
            repetitions,
        } => bench(cli, pipeline, video, *repetitions),
        Command::PipelineRun { pipeline, video } => pipeline_run(cli, pipeline, video),
    }
}

fn stage_seed(cli: &Cli, stage: &str) -> Option<u64> {
    cli.seed.map(|s| derive(s, name_hash(stage)))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    Ok(write_json(path, value)?)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn simulate(cli: &Cli, config: &Path) -> Result<(), CliError> {
    let cfg: SimulationConfig = read_json(config)?;
    let seed = stage_seed(cli, "simulate").unwrap_or(0);
    let (seq, truth) = render_sequence(&cfg.scene, &cfg.pattern, &cfg.camera, cfg.duration_s, seed)?;
    sequence_io::write_sequence(&seq, &cli.out)?;
    save_json(&cli.out.join(GROUND_TRUTH_FILE), &truth)?;
    save_json(&cli.out.join(SIMULATION_FILE), &cfg)?;
    println!("wrote {} frames to {}", seq.len(), cli.out.display());
    Ok(())
}

fn augment(cli: &Cli, input: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let mut cfg: AugmentationConfig = match config {
        Some(p) => read_json(p)?,
        None => AugmentationConfig::default(),
    };
    if let Some(seed) = stage_seed(cli, "augment") {
        cfg.rng_seed = seed;
    }
    let summary = build_augmented_dataset(input, &cli.out, &cfg)?;
    println!(
        "day {}, night {} ({} augmented), skipped {}",
        summary.day, summary.night, summary.augmented, summary.skipped
    );
    Ok(())
}

fn parse_box(text: &str) -> Result<BoundingBox, CliError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("--roi {text}: {e}")))?;
    let [x0, y0, x1, y1] = parts[..] else {
        return Err(CliError::Config(format!("--roi needs x0,y0,x1,y1, got {text}")));
    };
    BoundingBox::new(x0, y0, x1, y1).map_err(|e| CliError::Config(format!("--roi: {e}")))
}

/// Car box of a simulated sequence, when the directory has one.
fn simulated_target(dir: &Path) -> Option<BoundingBox> {
    let text = fs::read_to_string(dir.join(SIMULATION_FILE)).ok()?;
    let cfg: SimulationConfig = serde_json::from_str(&text).ok()?;
    Some(cfg.scene.effective_car_box())
}

/// A sequence directory itself, or its immediate sub-directories that are
/// sequences.
fn sequence_dirs(video: &Path) -> Result<Vec<PathBuf>, CliError> {
    if video.join(MANIFEST_FILE).is_file() {
        return Ok(vec![video.to_path_buf()]);
    }
    let entries = fs::read_dir(video).map_err(|e| CliError::io(video, e))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(MANIFEST_FILE).is_file())
        .collect();
    if dirs.is_empty() {
        return Err(CliError::Io(format!("{}: no {MANIFEST_FILE} found", video.display())));
    }
    dirs.sort();
    Ok(dirs)
}

fn analyze_cmd(cli: &Cli, video: &Path, backend: &Path, roi: Option<&str>, class: &str) -> Result<(), CliError> {
    let spec: DetectorSpec = read_json(backend)?;
    let roi = roi.map(parse_box).transpose()?;
    let class: ObjectClass = class.parse().map_err(|e| CliError::Config(format!("--class: {e}")))?;
    let dirs = sequence_dirs(video)?;
    if dirs.len() == 1 && dirs[0] == video {
        let report = analyze_one(cli, video, &cli.out, &spec, roi, &class)?;
        print_report(&report);
        return Ok(());
    }
    // one output directory per sequence, analyzed in parallel
    let results: Vec<Result<AnalysisReport, CliError>> = thread::scope(|s| {
        let handles: Vec<_> = dirs
            .iter()
            .map(|dir| {
                let out = cli.out.join(dir.file_name().expect("directory entry"));
                let (spec, class) = (&spec, &class);
                s.spawn(move || analyze_one(cli, dir, &out, spec, roi, class))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("analysis thread panicked"))
            .collect()
    });
    for (dir, result) in dirs.iter().zip(results) {
        let report = result?;
        print!("{}: ", dir.display());
        print_report(&report);
    }
    Ok(())
}

fn analyze_one(
    cli: &Cli,
    video: &Path,
    out: &Path,
    spec: &DetectorSpec,
    roi: Option<BoundingBox>,
    class: &ObjectClass,
) -> Result<AnalysisReport, CliError> {
    let seq = sequence_io::read_sequence(video)?;
    let mut backend = spec.build(roi.or_else(|| simulated_target(video)), timeout_from_env())?;
    info!(
        "analyzing {} frames of {} with {}",
        seq.len(),
        video.display(),
        backend.capabilities().name
    );
    let detections = detect_all(&mut backend, seq.frames())?;
    let provenance = Provenance {
        input: video.display().to_string(),
        backend: backend.capabilities().name.clone(),
        seed: cli.seed.unwrap_or(0),
        tool_version: TOOL_VERSION.into(),
    };
    let analysis = analyze(seq.frames(), &detections, seq.fps(), class, roi, provenance)?;
    create_dir(out)?;
    save_json(&out.join("report.json"), &analysis.report)?;
    let csv = |name: &str, r: std::io::Result<()>| r.map_err(|e| CliError::io(&out.join(name), e));
    csv(
        "signal.csv",
        report::write_signal_csv(&out.join("signal.csv"), &analysis.signal),
    )?;
    csv(
        "spectrum.csv",
        report::write_spectrum_csv(&out.join("spectrum.csv"), &analysis.spectrum),
    )?;
    csv(
        "loss_curve.csv",
        report::write_loss_csv(&out.join("loss_curve.csv"), &analysis.report.loss_curve),
    )?;
    Ok(analysis.report)
}

fn print_report(r: &AnalysisReport) {
    let m = &r.metrics;
    let peak = match r.dominant_peak.peak() {
        Some(p) => format!("{:.3} Hz", p.frequency_hz),
        None => "none".into(),
    };
    println!(
        "average {:.3}, min {:.3}, max {:.3}, range {:.3}, >=0.5 {:.1}%, peak {peak}",
        m.average,
        m.minimum,
        m.maximum,
        m.range,
        m.above_0_5 * 100.0
    );
}

fn compare(cli: &Cli, baseline: &Path, candidate: &Path) -> Result<(), CliError> {
    let a: AnalysisReport = read_json(baseline)?;
    let b: AnalysisReport = read_json(candidate)?;
    let cmp = report::compare(
        &baseline.display().to_string(),
        &a,
        &candidate.display().to_string(),
        &b,
    );
    print!("{}", cmp.to_table());
    create_dir(&cli.out)?;
    save_json(&cli.out.join("comparison.json"), &cmp)
}

fn load_pipeline(path: &Path) -> Result<PipelineConfig, CliError> {
    let cfg: PipelineConfig = read_json(path)?;
    cfg.validate()?;
    Ok(cfg)
}

fn load_frames(video: &Path) -> Result<VideoSequence, CliError> {
    Ok(sequence_io::read_sequence(video)?)
}

fn bench(cli: &Cli, pipeline: &Path, video: &Path, repetitions: usize) -> Result<(), CliError> {
    if repetitions == 0 {
        return Err(CliError::Config("--repetitions must be at least 1".into()));
    }
    let cfg = load_pipeline(pipeline)?;
    let seq = load_frames(video)?;
    let fallback = simulated_target(video);
    let timeout = timeout_from_env();
    let mut raw_only = cfg.raw_detector.build(fallback, timeout)?;
    let baseline_name = format!("{} alone", raw_only.capabilities().name);
    let baseline = measure_baseline(baseline_name, &mut raw_only, seq.frames(), repetitions)?;
    drop(raw_only);
    let mut p = cfg.build(fallback, timeout)?;
    let report = benchmark(&mut p, seq.frames(), repetitions, Some(baseline))?;
    create_dir(&cli.out)?;
    save_json(&cli.out.join("latency.json"), &report)?;
    println!(
        "{}: {} (baseline {} at {:.2} ms)",
        report.config,
        report.table_cell(),
        report.baseline.name,
        report.baseline.mean_total_ms
    );
    Ok(())
}

#[derive(Serialize)]
struct FrameResult {
    index: u64,
    timestamp_ms: u64,
    detections: Vec<Detection>,
    timings: StageTimings,
}

fn pipeline_run(cli: &Cli, pipeline: &Path, video: &Path) -> Result<(), CliError> {
    let cfg = load_pipeline(pipeline)?;
    let seq = load_frames(video)?;
    let mut p = cfg.build(simulated_target(video), timeout_from_env())?;
    let mut results = Vec::with_capacity(seq.len());
    for frame in seq.frames() {
        let (detections, timings) = p.run(frame)?;
        results.push(FrameResult {
            index: frame.index,
            timestamp_ms: frame.timestamp_ms,
            detections,
            timings,
        });
    }
    create_dir(&cli.out)?;
    save_json(&cli.out.join("detections.json"), &results)?;
    let count: usize = results.iter().map(|r| r.detections.len()).sum();
    println!("{}: {count} detections over {} frames", p.name(), results.len());
    Ok(())
}
