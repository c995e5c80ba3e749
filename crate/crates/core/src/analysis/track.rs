//! Minimal greedy IoU tracker.
//!
//! Tracks keep the detector's confidence untouched, so a track's confidence
//! series is exactly the detector's series for that object.

use serde::{Deserialize, Serialize};

use crate::model::{iou, BoundingBox, Detection, ObjectClass};
use crate::scalar::Scalar;

pub const DEFAULT_MATCH_IOU: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackObservation<T> {
    pub frame: usize,
    /// Index of the associated detection within its frame.
    pub detection: usize,
    pub bbox: BoundingBox<T>,
    pub confidence: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track<T> {
    pub id: usize,
    pub class_label: ObjectClass,
    pub observations: Vec<TrackObservation<T>>,
}

impl<T: Scalar> Track<T> {
    pub fn confidences(&self) -> Vec<T> {
        self.observations.iter().map(|o| o.confidence).collect()
    }

    fn last_box(&self) -> &BoundingBox<T> {
        &self
            .observations
            .last()
            .expect("tracks start with one observation")
            .bbox
    }
}

/// Associates detections frame to frame. Pairs are taken in descending IoU
/// order; a pair needs the same class and IoU >= `match_threshold`.
/// Unmatched detections start new tracks. Tracks are never retired, so an
/// object that reappears where it was last seen keeps its id.
pub fn iou_track<T: Scalar>(detections_per_frame: &[Vec<Detection<T>>], match_threshold: T) -> Vec<Track<T>> {
    let mut tracks: Vec<Track<T>> = Vec::new();
    for (frame, dets) in detections_per_frame.iter().enumerate() {
        let mut pairs: Vec<(T, usize, usize)> = Vec::new();
        for (ti, track) in tracks.iter().enumerate() {
            for (di, d) in dets.iter().enumerate() {
                if d.class_label != track.class_label {
                    continue;
                }
                let v = iou(track.last_box(), &d.bbox);
                if v >= match_threshold && v > T::zero() {
                    pairs.push((v, ti, di));
                }
            }
        }
        pairs.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .expect("finite IoU")
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut track_taken = vec![false; tracks.len()];
        let mut det_taken = vec![false; dets.len()];
        for (_, ti, di) in pairs {
            if track_taken[ti] || det_taken[di] {
                continue;
            }
            track_taken[ti] = true;
            det_taken[di] = true;
            tracks[ti].observations.push(observation(frame, di, &dets[di]));
        }
        for (di, d) in dets.iter().enumerate() {
            if !det_taken[di] {
                tracks.push(Track {
                    id: tracks.len(),
                    class_label: d.class_label.clone(),
                    observations: vec![observation(frame, di, d)],
                });
            }
        }
    }
    tracks
}

fn observation<T: Scalar>(frame: usize, detection: usize, d: &Detection<T>) -> TrackObservation<T> {
    TrackObservation {
        frame,
        detection,
        bbox: d.bbox,
        confidence: d.confidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn car(x: f64, y: f64, conf: f64) -> Detection<f64> {
        Detection::car(BoundingBox::new(x, y, x + 10.0, y + 10.0).unwrap(), conf).unwrap()
    }

    #[test]
    fn persistent_object_is_one_track() {
        let confs = [0.9, 0.35, 0.8, 0.1, 0.7, 0.6];
        let frames: Vec<_> = confs
            .iter()
            .enumerate()
            .map(|(i, &c)| vec![car(i as f64, 0.0, c)])
            .collect();
        let tracks = iou_track(&frames, DEFAULT_MATCH_IOU);
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].observations.len(), 6);
        assert_eq!(tracks[0].confidences(), confs);
    }

    #[test]
    fn crossing_objects_keep_identity() {
        // A moves right along y = 0, B moves left along y = 8; their mutual
        // IoU stays below 0.3 while each overlaps its own previous box.
        let frames = vec![
            vec![car(0.0, 0.0, 0.9), car(12.0, 8.0, 0.4)],
            // B listed first so input order does not decide identity
            vec![car(8.0, 8.0, 0.45), car(4.0, 0.0, 0.85)],
            vec![car(8.0, 0.0, 0.8), car(4.0, 8.0, 0.5)],
            vec![car(0.0, 8.0, 0.55), car(12.0, 0.0, 0.75)],
        ];
        let tracks = iou_track(&frames, DEFAULT_MATCH_IOU);
        assert_eq!(tracks.len(), 2);
        let a = &tracks[0];
        let b = &tracks[1];
        assert_eq!(a.confidences(), vec![0.9, 0.85, 0.8, 0.75]);
        assert_eq!(b.confidences(), vec![0.4, 0.45, 0.5, 0.55]);
        assert!(a.observations.iter().all(|o| o.bbox.y_min == 0.0));
        assert!(b.observations.iter().all(|o| o.bbox.y_min == 8.0));
    }

    #[test]
    fn distant_detection_starts_new_track() {
        let frames = vec![vec![car(0.0, 0.0, 0.9)], vec![car(50.0, 0.0, 0.9)]];
        assert_eq!(iou_track(&frames, DEFAULT_MATCH_IOU).len(), 2);
    }

    #[test]
    fn gap_frames_do_not_break_track() {
        let frames = vec![vec![car(0.0, 0.0, 0.9)], vec![], vec![car(1.0, 0.0, 0.2)]];
        let t = iou_track(&frames, DEFAULT_MATCH_IOU);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].observations[1].frame, 2);
    }
}
