use serde::{Deserialize, Serialize};

use crate::model::ModelError;
use crate::scalar::Scalar;

/// Axis-aligned box in pixel coordinates, half-open on the max edges.
///
/// Area is `(x_max - x_min) * (y_max - y_min)` with no +1 correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox<T> {
    pub x_min: T,
    pub y_min: T,
    pub x_max: T,
    pub y_max: T,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(x_min: T, y_min: T, x_max: T, y_max: T) -> Result<Self, ModelError> {
        let b = Self {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        if b.is_valid() {
            Ok(b)
        } else {
            Err(ModelError::InvalidBox(format!("({x_min}, {y_min}, {x_max}, {y_max})")))
        }
    }

    pub fn is_valid(&self) -> bool {
        let finite = [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        finite && self.x_min < self.x_max && self.y_min < self.y_max
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> (T, T) {
        let two = T::of(2.0);
        ((self.x_min + self.x_max) / two, (self.y_min + self.y_max) / two)
    }

    /// Area of the overlap, zero when the boxes are disjoint or only touch.
    pub fn intersection_area(&self, other: &Self) -> T {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= T::zero() || h <= T::zero() {
            T::zero()
        } else {
            w * h
        }
    }

    /// Grows the box by `margin` on every side.
    pub fn dilate(&self, margin: T) -> Self {
        Self {
            x_min: self.x_min - margin,
            y_min: self.y_min - margin,
            x_max: self.x_max + margin,
            y_max: self.y_max + margin,
        }
    }

    /// Scales the box about its center.
    pub fn scale_about_center(&self, factor: T) -> Self {
        let (cx, cy) = self.center();
        let half_w = self.width() * factor / T::of(2.0);
        let half_h = self.height() * factor / T::of(2.0);
        Self {
            x_min: cx - half_w,
            y_min: cy - half_h,
            x_max: cx + half_w,
            y_max: cy + half_h,
        }
    }

    pub fn intersects_frame(&self, width: u32, height: u32) -> bool {
        self.x_max > T::zero()
            && self.y_max > T::zero()
            && self.x_min < T::of(width as f64)
            && self.y_min < T::of(height as f64)
    }

    pub fn inside_frame(&self, width: u32, height: u32) -> bool {
        self.x_min >= T::zero()
            && self.y_min >= T::zero()
            && self.x_max <= T::of(width as f64)
            && self.y_max <= T::of(height as f64)
    }

    /// Integer pixel range `(x0, y0, x1, y1)` covered by the box, clipped to
    /// the frame. `None` when nothing of the box lands on a pixel.
    pub fn pixel_range(&self, width: u32, height: u32) -> Option<(u32, u32, u32, u32)> {
        let clip = |v: T, hi: u32| -> u32 {
            let v = v.as_f64();
            if v <= 0.0 {
                0
            } else if v >= hi as f64 {
                hi
            } else {
                v as u32
            }
        };
        let x0 = clip(self.x_min.floor(), width);
        let y0 = clip(self.y_min.floor(), height);
        let x1 = clip(self.x_max.ceil(), width);
        let y1 = clip(self.y_max.ceil(), height);
        (x0 < x1 && y0 < y1).then_some((x0, y0, x1, y1))
    }

    pub fn cast<U: Scalar>(&self) -> BoundingBox<U> {
        BoundingBox {
            x_min: U::of(self.x_min.as_f64()),
            y_min: U::of(self.y_min.as_f64()),
            x_max: U::of(self.x_max.as_f64()),
            y_max: U::of(self.y_max.as_f64()),
        }
    }
}

/// Intersection over union of two valid boxes, in `[0, 1]`.
pub fn iou<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> T {
    let inter = a.intersection_area(b);
    if inter <= T::zero() {
        return T::zero();
    }
    let union = a.area() + b.area() - inter;
    if union <= T::zero() {
        return T::zero();
    }
    (inter / union).min(T::one())
}
