//! Merging raw-path and tuned-path detections.
//!
//! Tuned/raw pairs with IoU >= threshold (and the same class, when
//! required) are matched greedily, highest IoU first. A matched pair becomes
//! one detection with the higher confidence and that member's box and class.
//! Everything unmatched passes through, so every raw detection is kept.
//! Pairs that overlap below the threshold are both kept.

use serde::{Deserialize, Serialize};

use crate::model::{iou, Detection};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CombinerConfig {
    pub iou_threshold: f64,
    pub class_match: bool,
}

impl Default for CombinerConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            class_match: true,
        }
    }
}

impl CombinerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.iou_threshold > 0.0 && self.iou_threshold <= 1.0 {
            Ok(())
        } else {
            Err(format!(
                "combiner.iou_threshold must be in (0, 1], got {}",
                self.iou_threshold
            ))
        }
    }
}

/// A combined detection and the inputs it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedDetection<T> {
    pub detection: Detection<T>,
    pub raw_index: Option<usize>,
    pub tuned_index: Option<usize>,
}

/// Output order: one entry per raw detection in raw order, then unmatched
/// tuned detections in tuned order.
pub fn combine_traced<T: Scalar>(
    raw: &[Detection<T>],
    tuned: &[Detection<T>],
    cfg: &CombinerConfig,
) -> Vec<CombinedDetection<T>> {
    let threshold = T::of(cfg.iou_threshold);
    let mut pairs: Vec<(T, usize, usize)> = Vec::new();
    for (ti, t) in tuned.iter().enumerate() {
        for (ri, r) in raw.iter().enumerate() {
            if cfg.class_match && t.class_label != r.class_label {
                continue;
            }
            let v = iou(&t.bbox, &r.bbox);
            if v >= threshold {
                pairs.push((v, ti, ri));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("finite IoU")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut tuned_for_raw: Vec<Option<usize>> = vec![None; raw.len()];
    let mut tuned_used = vec![false; tuned.len()];
    for (_, ti, ri) in pairs {
        if tuned_used[ti] || tuned_for_raw[ri].is_some() {
            continue;
        }
        tuned_used[ti] = true;
        tuned_for_raw[ri] = Some(ti);
    }

    let mut out: Vec<CombinedDetection<T>> = raw
        .iter()
        .zip(&tuned_for_raw)
        .enumerate()
        .map(|(ri, (r, matched))| match matched {
            None => CombinedDetection {
                detection: r.clone(),
                raw_index: Some(ri),
                tuned_index: None,
            },
            Some(ti) => {
                let t = &tuned[*ti];
                let winner = if t.confidence > r.confidence { t } else { r };
                CombinedDetection {
                    detection: winner.clone(),
                    raw_index: Some(ri),
                    tuned_index: Some(*ti),
                }
            }
        })
        .collect();
    out.extend(
        tuned
            .iter()
            .enumerate()
            .filter(|(ti, _)| !tuned_used[*ti])
            .map(|(ti, t)| CombinedDetection {
                detection: t.clone(),
                raw_index: None,
                tuned_index: Some(ti),
            }),
    );
    out
}

pub fn combine<T: Scalar>(raw: &[Detection<T>], tuned: &[Detection<T>], cfg: &CombinerConfig) -> Vec<Detection<T>> {
    combine_traced(raw, tuned, cfg)
        .into_iter()
        .map(|c| c.detection)
        .collect()
}
