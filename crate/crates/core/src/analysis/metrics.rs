use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisError;
use crate::model::ConfidenceSignal;
use crate::scalar::Scalar;

/// Thresholds reported in the `above_*` columns, as hundredths.
pub const METRIC_THRESHOLDS_PCT: [usize; 4] = [50, 60, 70, 80];

/// Threshold `k / 100`, computed the same way everywhere so the metric
/// columns and the detection-loss grid compare bit-for-bit.
pub fn threshold<T: Scalar>(hundredths: usize) -> T {
    T::of_usize(hundredths) / T::of_usize(100)
}

/// Summary of a confidence signal. `above_*` count samples `>=` the
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalMetrics<T> {
    pub average: T,
    pub minimum: T,
    pub maximum: T,
    pub range: T,
    #[serde(rename = "above_0.5")]
    pub above_0_5: T,
    #[serde(rename = "above_0.6")]
    pub above_0_6: T,
    #[serde(rename = "above_0.7")]
    pub above_0_7: T,
    #[serde(rename = "above_0.8")]
    pub above_0_8: T,
}

impl<T: Scalar> SignalMetrics<T> {
    /// `above_*` values in threshold order.
    pub fn fractions_above(&self) -> [T; 4] {
        [self.above_0_5, self.above_0_6, self.above_0_7, self.above_0_8]
    }
}

pub fn compute_metrics<T: Scalar>(signal: &ConfidenceSignal<T>) -> Result<SignalMetrics<T>, AnalysisError> {
    metrics_of(signal.values())
}

pub fn metrics_of<T: Scalar>(values: &[T]) -> Result<SignalMetrics<T>, AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::EmptySignal);
    }
    let n = T::of_usize(values.len());
    let (sum, minimum, maximum) = values
        .iter()
        .fold((T::zero(), T::infinity(), T::neg_infinity()), |(s, lo, hi), &v| {
            (s + v, lo.min(v), hi.max(v))
        });
    let frac = |pct: usize| {
        let t: T = threshold(pct);
        T::of_usize(values.iter().filter(|&&v| v >= t).count()) / n
    };
    let [f5, f6, f7, f8] = METRIC_THRESHOLDS_PCT.map(frac);
    Ok(SignalMetrics {
        average: sum / n,
        minimum,
        maximum,
        range: maximum - minimum,
        above_0_5: f5,
        above_0_6: f6,
        above_0_7: f7,
        above_0_8: f8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObjectClass;

    #[test]
    fn hand_computed_example() {
        let m = metrics_of::<f64>(&[0.9, 0.3, 0.8, 0.4, 0.6]).unwrap();
        assert!((m.average - 0.6).abs() < 1e-12);
        assert_eq!(m.minimum, 0.3);
        assert_eq!(m.maximum, 0.9);
        assert!((m.range - 0.6).abs() < 1e-12);
        assert_eq!(m.above_0_5, 0.6);
        assert_eq!(m.above_0_6, 0.6);
        assert_eq!(m.above_0_7, 0.4);
        assert_eq!(m.above_0_8, 0.4);
    }

    #[test]
    fn constant_signal() {
        let s = ConfidenceSignal::new(vec![0.7f64; 10], 30.0, ObjectClass::Car).unwrap();
        let m = compute_metrics(&s).unwrap();
        assert_eq!(m.range, 0.0);
        assert_eq!((m.above_0_5, m.above_0_6, m.above_0_7), (1.0, 1.0, 1.0));
        assert_eq!(m.above_0_8, 0.0);
    }

    #[test]
    fn single_precision() {
        let m = metrics_of(&[0.5f32, 1.0]).unwrap();
        assert_eq!(m.average, 0.75);
        assert_eq!(m.above_0_5, 1.0);
        assert_eq!(m.above_0_6, 0.5);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(metrics_of::<f64>(&[]), Err(AnalysisError::EmptySignal)));
    }

    #[test]
    fn report_keys_match_table_columns() {
        let m = metrics_of(&[0.5]).unwrap();
        let v = serde_json::to_value(m).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            [
                "above_0.5",
                "above_0.6",
                "above_0.7",
                "above_0.8",
                "average",
                "maximum",
                "minimum",
                "range"
            ]
        );
    }
}
