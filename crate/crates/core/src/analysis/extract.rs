use crate::analysis::AnalysisError;
use crate::model::{iou, BoundingBox, ConfidenceSignal, Detection, GapPolicy, ObjectClass};
use crate::scalar::Scalar;

/// Below this IoU with the previous box the target is considered lost and
/// the most confident candidate is taken instead.
pub const REACQUIRE_IOU: f64 = 0.1;

/// Follows one target through per-frame detections and records its
/// confidence.
///
/// The target starts at `roi` (or the most confident `target_class`
/// detection of the first frame that has one). Each frame picks the
/// candidate with the highest IoU against the previously selected box; when
/// that IoU is below 0.1 the most confident candidate wins. Frames without
/// any candidate record 0.0 and keep the previous box.
pub fn extract_signal<T: Scalar>(
    detections_per_frame: &[Vec<Detection<T>>],
    target_class: &ObjectClass,
    roi: Option<BoundingBox<T>>,
    fps: f64,
) -> Result<ConfidenceSignal<T>, AnalysisError> {
    if detections_per_frame.is_empty() {
        return Err(AnalysisError::EmptySignal);
    }
    let mut previous = roi;
    let mut any = false;
    let mut values = Vec::with_capacity(detections_per_frame.len());
    for dets in detections_per_frame {
        let candidates: Vec<&Detection<T>> = dets.iter().filter(|d| &d.class_label == target_class).collect();
        let Some(most_confident) = candidates
            .iter()
            .copied()
            .reduce(|a, b| if b.confidence > a.confidence { b } else { a })
        else {
            values.push(T::zero());
            continue;
        };
        any = true;
        let chosen = match &previous {
            None => most_confident,
            Some(prev) => {
                let (best, best_iou) = candidates
                    .iter()
                    .map(|d| (*d, iou(&d.bbox, prev)))
                    .reduce(|a, b| if b.1 > a.1 { b } else { a })
                    .expect("non-empty candidates");
                if best_iou < T::of(REACQUIRE_IOU) {
                    most_confident
                } else {
                    best
                }
            }
        };
        values.push(chosen.confidence);
        previous = Some(chosen.bbox);
    }
    if !any {
        return Err(AnalysisError::NoTarget(target_class.to_string()));
    }
    Ok(ConfidenceSignal::with_gap_policy(
        values,
        fps,
        target_class.clone(),
        GapPolicy::ZeroFill,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(x: f64, conf: f64) -> Detection<f64> {
        Detection::car(BoundingBox::new(x, 0.0, x + 10.0, 10.0).unwrap(), conf).unwrap()
    }

    #[test]
    fn single_detection_per_frame_is_copied() {
        let confs = [0.9, 0.2, 0.55, 1.0, 0.0];
        let frames: Vec<_> = confs.iter().map(|&c| vec![det(5.0, c)]).collect();
        let s = extract_signal(&frames, &ObjectClass::Car, None, 30.0).unwrap();
        assert_eq!(s.values(), &confs);
    }

    #[test]
    fn missing_frame_is_zero_filled() {
        let frames = vec![vec![det(5.0, 0.8)], vec![], vec![det(5.0, 0.7)]];
        let s = extract_signal(&frames, &ObjectClass::Car, None, 30.0).unwrap();
        assert_eq!(s.values(), &[0.8, 0.0, 0.7]);
        assert_eq!(s.gap_policy(), GapPolicy::ZeroFill);
    }

    #[test]
    fn roi_keeps_the_requested_car() {
        // Car A drifts right 2 px per frame near x = 0; car B sits at x = 50
        // and is always more confident.
        let a = [0.6, 0.5, 0.4, 0.45, 0.3];
        let b = [0.9, 0.95, 0.92, 0.97, 0.99];
        let frames: Vec<_> = (0..5)
            .map(|i| vec![det(50.0, b[i]), det(2.0 * i as f64, a[i])])
            .collect();
        let roi = BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let s = extract_signal(&frames, &ObjectClass::Car, Some(roi), 24.0).unwrap();
        assert_eq!(s.values(), &a);
        let unseeded = extract_signal(&frames, &ObjectClass::Car, None, 24.0).unwrap();
        assert_eq!(unseeded.values(), &b);
    }

    #[test]
    fn lost_target_falls_back_to_most_confident() {
        let frames = vec![vec![det(0.0, 0.5)], vec![det(40.0, 0.3), det(80.0, 0.6)]];
        let s = extract_signal(&frames, &ObjectClass::Car, None, 24.0).unwrap();
        assert_eq!(s.values(), &[0.5, 0.6]);
    }

    #[test]
    fn other_classes_are_ignored() {
        let person = Detection::new(BoundingBox::new(0.0, 0.0, 5.0, 5.0).unwrap(), ObjectClass::Person, 0.9).unwrap();
        let frames = vec![vec![person.clone()], vec![person]];
        assert!(matches!(
            extract_signal(&frames, &ObjectClass::Car, None, 24.0),
            Err(AnalysisError::NoTarget(_))
        ));
    }
}
