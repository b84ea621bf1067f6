//! Geometry core for localizing a camera against a floor plan of character
//! landmarks (room numbers, gate numbers) from a single still image.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! file system, external processes or text formats lives in the `plateloc`
//! companion crate.
//!
//! Pipeline stages, in the order the `pipeline` module runs them:
//!
//! 1. **linesegs** - gradient region-growing segment detector.
//! 2. **vp** - weighted closed-form vanishing point inside RANSAC, roll from
//!    the vertical vanishing point, image derotation.
//! 3. **detect** - stable extremal regions and the area/orientation filter.
//! 4. **ocr** - binarization, region masking, engine abstraction and landmark
//!    selection.
//! 5. **pose** - angle-of-view and depth from the horizontal vanishing point
//!    and the OCR box width, then the floor-plane position.
//!
//! `synth` is an independent pinhole renderer used as a ground-truth oracle.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod camera;
pub mod detect;
pub mod floorplan;
pub mod geom;
pub mod image;
pub mod linesegs;
pub mod ocr;
pub mod pipeline;
pub mod pose;
pub mod synth;
pub mod vp;

pub use camera::{CameraError, CameraIntrinsics};
pub use detect::{FilterParams, Polarity, Region, RegionParams};
pub use floorplan::{FloorPlan, FloorPlanError, Landmark, Violation};
pub use geom::{Point2, Point3};
pub use image::GrayImage;
pub use linesegs::{LineSegment, SegParams};
pub use ocr::{EngineFailure, MockEngine, OcrBox, OcrEngine, OcrError, OcrParams};
pub use pipeline::{PipelineConfig, PipelineError};
pub use pose::{HorizonX, PoseEstimate, PoseFlags};
pub use vp::{InlierMetric, RansacParams, VanishingPoint, VpKind};
