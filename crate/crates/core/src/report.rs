//! Analysis reports, plot-ready CSV files and report comparison.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    compute_metrics, detection_loss, extract_signal, histogram_l1, spectrum, tonal_histogram, AnalysisError,
    DetectionLossCurve, DominantPeak, SignalMetrics, Spectrum,
};
use crate::model::{BoundingBox, ConfidenceSignal, Detection, Frame, ObjectClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Sequence directory or simulation config the signal came from.
    pub input: String,
    pub backend: String,
    pub seed: u64,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub metrics: SignalMetrics<f64>,
    pub dominant_peak: DominantPeak<f64>,
    pub loss_curve: DetectionLossCurve<f64>,
    /// Tonal-histogram L1 distance of the target region between the most
    /// and least confident frames.
    pub histogram_shift_l1: f64,
    pub provenance: Provenance,
}

/// A report together with the series it summarizes.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: AnalysisReport,
    pub signal: ConfidenceSignal<f64>,
    pub spectrum: Spectrum<f64>,
}

/// Extracts the target's confidence signal from per-frame detections and
/// measures it. `frames` and `detections` are parallel.
pub fn analyze(
    frames: &[Frame],
    detections: &[Vec<Detection<f64>>],
    fps: f64,
    target_class: &ObjectClass,
    roi: Option<BoundingBox<f64>>,
    provenance: Provenance,
) -> Result<Analysis, AnalysisError> {
    assert_eq!(frames.len(), detections.len(), "one detection list per frame");
    let signal = extract_signal(detections, target_class, roi, fps)?;
    let metrics = compute_metrics(&signal)?;
    let loss_curve = detection_loss(&signal)?;
    let spectrum = spectrum(&signal)?;
    let histogram_shift_l1 = histogram_shift(frames, detections, &signal, target_class, roi)?;
    Ok(Analysis {
        report: AnalysisReport {
            metrics,
            dominant_peak: spectrum.dominant,
            loss_curve,
            histogram_shift_l1,
            provenance,
        },
        signal,
        spectrum,
    })
}

/// The region is `roi`, else the most confident target box in the most
/// confident frame; the same region is compared in both frames.
fn histogram_shift(
    frames: &[Frame],
    detections: &[Vec<Detection<f64>>],
    signal: &ConfidenceSignal<f64>,
    target_class: &ObjectClass,
    roi: Option<BoundingBox<f64>>,
) -> Result<f64, AnalysisError> {
    let values = signal.values();
    let argmax = argbest(values, |a, b| a > b);
    let argmin = argbest(values, |a, b| a < b);
    let region = match roi {
        Some(r) => r,
        None => detections[argmax]
            .iter()
            .filter(|d| &d.class_label == target_class)
            .max_by(|a, b| a.confidence.total_cmp(&b.confidence))
            .map(|d| d.bbox)
            .ok_or_else(|| AnalysisError::NoTarget(target_class.to_string()))?,
    };
    let hi = tonal_histogram(&frames[argmax], &region)?;
    let lo = tonal_histogram(&frames[argmin], &region)?;
    Ok(histogram_l1(&hi, &lo))
}

/// First index whose value beats all earlier ones under `better`.
fn argbest(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if better(v, values[best]) {
            best = i;
        }
    }
    best
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    out.flush()
}

/// `index,timestamp_ms,confidence`
pub fn write_signal_csv(path: &Path, signal: &ConfidenceSignal<f64>) -> std::io::Result<()> {
    let fps = signal.fps();
    write_csv(
        path,
        "index,timestamp_ms,confidence",
        signal
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{i},{},{v}", crate::model::timestamp_for(i as u64, fps))),
    )
}

/// `frequency_hz,magnitude`
pub fn write_spectrum_csv(path: &Path, spectrum: &Spectrum<f64>) -> std::io::Result<()> {
    write_csv(
        path,
        "frequency_hz,magnitude",
        spectrum
            .frequencies
            .iter()
            .zip(&spectrum.magnitudes)
            .map(|(f, m)| format!("{f},{m}")),
    )
}

/// `threshold,fraction`
pub fn write_loss_csv(path: &Path, curve: &DetectionLossCurve<f64>) -> std::io::Result<()> {
    write_csv(
        path,
        "threshold,fraction",
        curve
            .thresholds
            .iter()
            .zip(&curve.fraction_detected)
            .map(|(t, f)| format!("{t},{f}")),
    )
}

/// Relative change `(candidate - baseline) / baseline * 100`, rounded to two
/// decimals. `None` when the baseline is zero.
pub fn improvement_pct(baseline: f64, candidate: f64) -> Option<f64> {
    if baseline == 0.0 {
        return None;
    }
    let pct = (candidate - baseline) / baseline * 100.0;
    Some((pct * 100.0).round() / 100.0)
}

/// Signed percentage with up to two decimals and at least one:
/// `+42.0%`, `+26.98%`, `-3.5%`.
pub fn format_pct(pct: f64) -> String {
    let mut s = format!("{pct:+.2}");
    if s.ends_with('0') {
        s.pop();
    }
    s.push('%');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub metric: String,
    pub baseline: f64,
    pub candidate: f64,
    pub delta: f64,
    pub improvement_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub candidate: String,
    pub rows: Vec<MetricDelta>,
}

fn metric_rows(m: &SignalMetrics<f64>) -> [(&'static str, f64); 8] {
    [
        ("average", m.average),
        ("minimum", m.minimum),
        ("maximum", m.maximum),
        ("range", m.range),
        ("above_0.5", m.above_0_5),
        ("above_0.6", m.above_0_6),
        ("above_0.7", m.above_0_7),
        ("above_0.8", m.above_0_8),
    ]
}

pub fn compare(
    baseline_name: &str,
    baseline: &AnalysisReport,
    candidate_name: &str,
    candidate: &AnalysisReport,
) -> Comparison {
    let rows = metric_rows(&baseline.metrics)
        .into_iter()
        .zip(metric_rows(&candidate.metrics))
        .map(|((metric, b), (_, c))| MetricDelta {
            metric: metric.to_owned(),
            baseline: b,
            candidate: c,
            delta: c - b,
            improvement_pct: improvement_pct(b, c),
        })
        .collect();
    Comparison {
        baseline: baseline_name.to_owned(),
        candidate: candidate_name.to_owned(),
        rows,
    }
}

impl Comparison {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>12} {:>12} {:>10} {:>10}",
            "metric", "baseline", "candidate", "delta", "change"
        );
        for r in &self.rows {
            let change = r.improvement_pct.map(format_pct).unwrap_or_else(|| "n/a".into());
            let _ = writeln!(
                out,
                "{:<10} {:>12.4} {:>12.4} {:>+10.4} {:>10}",
                r.metric, r.baseline, r.candidate, r.delta, change
            );
        }
        let _ = writeln!(out, "baseline: {}\ncandidate: {}", self.baseline, self.candidate);
        out
    }
}
