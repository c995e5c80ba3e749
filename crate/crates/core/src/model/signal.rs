use serde::{Deserialize, Serialize};

use crate::model::{ModelError, ObjectClass};
use crate::scalar::Scalar;

/// How frames without a target detection were written into a signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum GapPolicy {
    /// Missing detections recorded as confidence 0.0.
    #[default]
    ZeroFill,
}

/// Per-frame detector confidence for one target, sampled at `fps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSignal<T> {
    values: Vec<T>,
    fps: f64,
    target_class: ObjectClass,
    gap_policy: GapPolicy,
}

impl<T: Scalar> ConfidenceSignal<T> {
    pub fn new(values: Vec<T>, fps: f64, target_class: ObjectClass) -> Result<Self, ModelError> {
        Self::with_gap_policy(values, fps, target_class, GapPolicy::ZeroFill)
    }

    pub fn with_gap_policy(
        values: Vec<T>,
        fps: f64,
        target_class: ObjectClass,
        gap_policy: GapPolicy,
    ) -> Result<Self, ModelError> {
        if values.is_empty() {
            return Err(ModelError::InvalidSignal("signal has no samples".into()));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(ModelError::InvalidSignal(format!("fps must be > 0, got {fps}")));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= T::zero() && **v <= T::one()))
        {
            return Err(ModelError::InvalidSignal(format!("sample {i} = {v} is outside [0, 1]")));
        }
        Ok(Self {
            values,
            fps,
            target_class,
            gap_policy,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn target_class(&self) -> &ObjectClass {
        &self.target_class
    }

    pub fn gap_policy(&self) -> GapPolicy {
        self.gap_policy
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
