//! Flare-sensitive reference detector.
//!
//! Given the true car box, confidence falls linearly with the flare energy
//! `E` measured around the car: `clamp(c_clear * (1 - gamma * E), 0, 1)`.
//! `E` is the mean, over the dilated box, of how far each pixel's brightest
//! channel rises above `saturation_level`, normalized to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::detector::{BackendError, Capabilities, DetectorBackend};
use crate::model::{BoundingBox, Detection, Frame, ObjectClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceDetectorConfig {
    pub c_clear: f64,
    pub gamma: f64,
    pub saturation_level: u8,
    /// Pixels added around the target box when measuring flare energy.
    pub dilation: u32,
}

impl Default for ReferenceDetectorConfig {
    fn default() -> Self {
        Self {
            c_clear: 0.95,
            gamma: 0.85,
            saturation_level: 240,
            dilation: 8,
        }
    }
}

impl ReferenceDetectorConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        if !(self.c_clear > 0.0 && self.c_clear <= 1.0) {
            return Err(BackendError::Config(format!(
                "c_clear must be in (0, 1], got {}",
                self.c_clear
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(BackendError::Config(format!(
                "gamma must be in [0, 1], got {}",
                self.gamma
            )));
        }
        if self.saturation_level == 255 {
            return Err(BackendError::Config("saturation_level must be below 255".into()));
        }
        Ok(())
    }

    /// Confidence for a given flare energy.
    pub fn confidence_for(&self, energy: f64) -> f64 {
        (self.c_clear * (1.0 - self.gamma * energy)).clamp(0.0, 1.0)
    }
}

/// Mean normalized max-channel excess over `saturation_level` inside the
/// dilated box, clipped to the frame. Zero when nothing of the box is visible.
pub fn flare_energy(frame: &Frame, target: &BoundingBox<f64>, cfg: &ReferenceDetectorConfig) -> f64 {
    let region = target.dilate(cfg.dilation as f64);
    let Some((x0, y0, x1, y1)) = region.pixel_range(frame.width(), frame.height()) else {
        return 0.0;
    };
    let sat = cfg.saturation_level as u32;
    let span = (255 - sat) as f64;
    let row_len = 3 * frame.width() as usize;
    let mut total = 0u64;
    for y in y0..y1 {
        let row = &frame.pixels()[y as usize * row_len..(y as usize + 1) * row_len];
        for px in row[3 * x0 as usize..3 * x1 as usize].chunks_exact(3) {
            let m = px[0].max(px[1]).max(px[2]) as u32;
            total += m.saturating_sub(sat) as u64;
        }
    }
    let count = ((x1 - x0) as u64 * (y1 - y0) as u64) as f64;
    total as f64 / (count * span)
}

/// One "car" detection at `target` whose confidence drops with flare energy.
/// Empty when the target does not intersect the frame.
pub fn reference_detect(
    frame: &Frame,
    target: &BoundingBox<f64>,
    cfg: &ReferenceDetectorConfig,
) -> Vec<Detection<f64>> {
    if !target.is_valid() || !target.intersects_frame(frame.width(), frame.height()) {
        return Vec::new();
    }
    let confidence = cfg.confidence_for(flare_energy(frame, target, cfg));
    vec![Detection {
        bbox: *target,
        class_label: ObjectClass::Car,
        confidence,
    }]
}

/// [`reference_detect`] behind the [`DetectorBackend`] interface.
#[derive(Debug, Clone)]
pub struct ReferenceDetector {
    config: ReferenceDetectorConfig,
    target: BoundingBox<f64>,
    caps: Capabilities,
}

impl ReferenceDetector {
    pub fn new(target: BoundingBox<f64>, config: ReferenceDetectorConfig) -> Result<Self, BackendError> {
        config.validate()?;
        if !target.is_valid() {
            return Err(BackendError::Config(format!("invalid target box {target:?}")));
        }
        Ok(Self {
            config,
            target,
            caps: Capabilities {
                name: "reference".into(),
                classes: vec![ObjectClass::Car],
                expected_resolution: None,
            },
        })
    }

    pub fn config(&self) -> &ReferenceDetectorConfig {
        &self.config
    }

    pub fn target(&self) -> &BoundingBox<f64> {
        &self.target
    }
}

impl DetectorBackend for ReferenceDetector {
    fn capabilities(&self) -> &Capabilities {
        &self.caps
    }

    fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection<f64>>, BackendError> {
        Ok(reference_detect(frame, &self.target, &self.config))
    }
}
