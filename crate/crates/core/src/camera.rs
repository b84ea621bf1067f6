//! Pinhole intrinsics and the pixel <-> normalized coordinate maps.

use serde::{Deserialize, Serialize};

use crate::geom::Point2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CameraError {
    #[error("singular calibration: focal lengths must be non-zero (fx = {fx}, fy = {fy})")]
    SingularCalibration { fx: f64, fy: f64 },
    #[error("invalid intrinsics: focal lengths must be positive and all values finite")]
    InvalidIntrinsics,
}

/// Zero-skew camera calibration, all values in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, CameraError> {
        let k = Self { fx, fy, cx, cy };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), CameraError> {
        if self.fx == 0.0 || self.fy == 0.0 {
            return Err(CameraError::SingularCalibration {
                fx: self.fx,
                fy: self.fy,
            });
        }
        let finite = [self.fx, self.fy, self.cx, self.cy]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.fx < 0.0 || self.fy < 0.0 {
            return Err(CameraError::InvalidIntrinsics);
        }
        Ok(())
    }

    pub fn principal_point(&self) -> Point2 {
        Point2::new(self.cx, self.cy)
    }

    pub fn to_normalized(&self, px: Point2) -> Point2 {
        Point2::new((px.x - self.cx) / self.fx, (px.y - self.cy) / self.fy)
    }

    pub fn to_pixel(&self, n: Point2) -> Point2 {
        Point2::new(n.x * self.fx + self.cx, n.y * self.fy + self.cy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_point_maps_to_origin() {
        let k = CameraIntrinsics::new(1000.0, 1000.0, 500.0, 400.0).unwrap();
        assert_eq!(k.to_normalized(Point2::new(500.0, 400.0)), Point2::new(0.0, 0.0));
        assert_eq!(k.to_normalized(Point2::new(1500.0, 400.0)), Point2::new(1.0, 0.0));
    }

    #[test]
    fn zero_focal_is_singular() {
        assert!(matches!(
            CameraIntrinsics::new(0.0, 1000.0, 0.0, 0.0),
            Err(CameraError::SingularCalibration { .. })
        ));
        assert_eq!(
            CameraIntrinsics::new(-5.0, 1000.0, 0.0, 0.0),
            Err(CameraError::InvalidIntrinsics)
        );
    }
}
