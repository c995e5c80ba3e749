use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisError;
use crate::model::{BoundingBox, Frame};
use crate::scalar::Scalar;

/// Normalized 256-bin histograms of the R, G and B channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TonalHistogram<T> {
    pub channels: [Vec<T>; 3],
}

impl<T: Scalar> TonalHistogram<T> {
    /// Mean bin index of one channel, a quick summary of where mass sits.
    pub fn mean_level(&self, channel: usize) -> T {
        self.channels[channel]
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &p)| acc + T::of_usize(i) * p)
    }
}

pub fn tonal_histogram<T: Scalar>(frame: &Frame, region: &BoundingBox<T>) -> Result<TonalHistogram<T>, AnalysisError> {
    if !region.is_valid() {
        return Err(AnalysisError::InvalidRegion(format!("{region:?}")));
    }
    let (x0, y0, x1, y1) = region
        .pixel_range(frame.width(), frame.height())
        .ok_or_else(|| AnalysisError::InvalidRegion(format!("{region:?} covers no pixels")))?;
    let mut counts = [[0u64; 256]; 3];
    for y in y0..y1 {
        for x in x0..x1 {
            let px = frame.pixel(x, y);
            for c in 0..3 {
                counts[c][px[c] as usize] += 1;
            }
        }
    }
    let total = T::of_usize(((x1 - x0) * (y1 - y0)) as usize);
    let channels = counts.map(|ch| ch.iter().map(|&n| T::of(n as f64) / total).collect());
    Ok(TonalHistogram { channels })
}

/// L1 distance of one channel, in `[0, 2]`.
pub fn channel_l1<T: Scalar>(a: &TonalHistogram<T>, b: &TonalHistogram<T>, channel: usize) -> T {
    a.channels[channel]
        .iter()
        .zip(&b.channels[channel])
        .fold(T::zero(), |acc, (&p, &q)| acc + (p - q).abs())
}

/// Mean of the per-channel L1 distances, in `[0, 2]`.
pub fn histogram_l1<T: Scalar>(a: &TonalHistogram<T>, b: &TonalHistogram<T>) -> T {
    (0..3).fold(T::zero(), |acc, c| acc + channel_l1(a, b, c)) / T::of(3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region() -> BoundingBox<f64> {
        BoundingBox::new(2.0, 2.0, 8.0, 6.0).unwrap()
    }

    #[test]
    fn uniform_gray_is_a_delta() {
        let f = Frame::filled(10, 10, [77, 77, 77]).unwrap();
        let h = tonal_histogram(&f, &region()).unwrap();
        for ch in &h.channels {
            assert_eq!(ch.iter().filter(|&&p| p > 0.0).count(), 1);
            assert_eq!(ch[77], 1.0);
        }
    }

    #[test]
    fn bins_sum_to_one_and_distance_is_bounded() {
        let mut f = Frame::filled(10, 10, [0, 10, 200]).unwrap();
        f.set_pixel(3, 3, [255, 0, 1]);
        f.set_pixel(4, 4, [9, 90, 201]);
        let h = tonal_histogram(&f, &region()).unwrap();
        for ch in &h.channels {
            assert!((ch.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(histogram_l1(&h, &h), 0.0);
        let other = tonal_histogram(&Frame::filled(10, 10, [1, 11, 100]).unwrap(), &region()).unwrap();
        let d = histogram_l1(&h, &other);
        assert!(d > 0.0 && d <= 2.0);
        assert_eq!(channel_l1(&h, &other, 2), 2.0);
    }

    #[test]
    fn degenerate_region_is_rejected() {
        let f = Frame::filled(10, 10, [0; 3]).unwrap();
        let outside = BoundingBox {
            x_min: 20.0,
            y_min: 0.0,
            x_max: 30.0,
            y_max: 5.0,
        };
        assert!(tonal_histogram(&f, &outside).is_err());
        let flat = BoundingBox {
            x_min: 2.0,
            y_min: 2.0,
            x_max: 2.0,
            y_max: 5.0,
        };
        assert!(tonal_histogram(&f, &flat).is_err());
    }
}
