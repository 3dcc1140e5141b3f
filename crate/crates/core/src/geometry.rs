//! Axis-aligned pixel boxes. Origin is the top-left corner of the image, y
//! grows downward.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoxError {
    #[error("box coordinates must be finite")]
    NotFinite,
    #[error("box origin must be non-negative")]
    NegativeOrigin,
    #[error("box width and height must be positive")]
    EmptyExtent,
    #[error("box extends to ({right}, {bottom}) outside the {width}x{height} image")]
    OutOfFrame { right: f64, bottom: f64, width: f64, height: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bbox<T> {
    pub x: T,
    pub y: T,
    pub width: T,
    pub height: T,
}

impl<T: Scalar> Bbox<T> {
    pub fn new(x: T, y: T, width: T, height: T) -> Self {
        Self { x, y, width, height }
    }

    /// Checks `x, y >= 0` and `width, height > 0`, and when the frame size
    /// is known, that the box fits inside it.
    pub fn validate(&self, frame: Option<(T, T)>) -> Result<(), BoxError> {
        let parts = [self.x, self.y, self.width, self.height];
        if !parts.iter().all(|v| v.is_finite_value()) {
            return Err(BoxError::NotFinite);
        }
        if self.x < T::zero() || self.y < T::zero() {
            return Err(BoxError::NegativeOrigin);
        }
        if self.width <= T::zero() || self.height <= T::zero() {
            return Err(BoxError::EmptyExtent);
        }
        if let Some((w, h)) = frame {
            if self.right() > w || self.bottom() > h {
                return Err(BoxError::OutOfFrame {
                    right: self.right().to_f64(),
                    bottom: self.bottom().to_f64(),
                    width: w.to_f64(),
                    height: h.to_f64(),
                });
            }
        }
        Ok(())
    }

    pub fn right(&self) -> T {
        self.x + self.width
    }

    pub fn bottom(&self) -> T {
        self.y + self.height
    }

    pub fn area(&self) -> T {
        self.width * self.height
    }

    pub fn intersection_area(&self, other: &Self) -> T {
        let w = self.right().min_of(other.right()) - self.x.max_of(other.x);
        let h = self.bottom().min_of(other.bottom()) - self.y.max_of(other.y);
        if w <= T::zero() || h <= T::zero() {
            T::zero()
        } else {
            w * h
        }
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> Bbox<U> {
        Bbox { x: f(self.x), y: f(self.y), width: f(self.width), height: f(self.height) }
    }
}

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn iou_box<T: Scalar>(a: &Bbox<T>, b: &Bbox<T>) -> T {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= T::zero() {
        return T::zero();
    }
    inter / union
}
