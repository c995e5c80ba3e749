use serde::{Deserialize, Serialize};

use crate::analysis::metrics::threshold;
use crate::analysis::AnalysisError;
use crate::model::ConfidenceSignal;
use crate::scalar::Scalar;

/// Grid points 0.00, 0.01, ..., 1.00.
pub const LOSS_GRID_POINTS: usize = 101;

/// Fraction of frames whose confidence is at least each threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionLossCurve<T> {
    pub thresholds: Vec<T>,
    pub fraction_detected: Vec<T>,
}

impl<T: Scalar> DetectionLossCurve<T> {
    /// Fraction at grid threshold `hundredths / 100`.
    pub fn at(&self, hundredths: usize) -> T {
        self.fraction_detected[hundredths]
    }
}

pub fn detection_loss<T: Scalar>(signal: &ConfidenceSignal<T>) -> Result<DetectionLossCurve<T>, AnalysisError> {
    detection_loss_of(signal.values())
}

pub fn detection_loss_of<T: Scalar>(values: &[T]) -> Result<DetectionLossCurve<T>, AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::EmptySignal);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("signal values are finite"));
    let n = T::of_usize(values.len());
    let thresholds: Vec<T> = (0..LOSS_GRID_POINTS).map(threshold).collect();
    let fraction_detected = thresholds
        .iter()
        .map(|&t| {
            let below = sorted.partition_point(|&v| v < t);
            T::of_usize(sorted.len() - below) / n
        })
        .collect();
    Ok(DetectionLossCurve {
        thresholds,
        fraction_detected,
    })
}
