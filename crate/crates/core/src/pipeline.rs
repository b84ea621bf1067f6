//! End-to-end localization of one grayscale image.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::camera::{CameraError, CameraIntrinsics};
use crate::detect::{detect_regions, geometric_filter, FilterParams, RegionParams};
use crate::floorplan::{FloorPlan, Landmark};
use crate::image::GrayImage;
use crate::linesegs::{detect_segments, split_by_orientation, to_normalized, LineSegment, SegParams};
use crate::ocr::{preprocess_for_ocr, recognize, select_landmark, EngineFailure, OcrBox, OcrEngine, OcrError, OcrParams};
use crate::pose::{ocr_width_normalized, solve_pose, HorizonX, PoseError, PoseEstimate};
use crate::vp::{derotate, estimate_roll, ransac_vp, InlierMetric, RansacParams, VanishingPoint, VpError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub segments: SegParams,
    /// Folded-angle tolerance (degrees) for near-horizontal and near-vertical
    /// segments.
    pub orientation_tol_deg: f64,
    pub ransac: RansacParams,
    /// RANSAC for the vertical vanishing point, which is usually far away or
    /// at infinity.
    pub vertical_ransac: RansacParams,
    pub roll_trigger_deg: f64,
    pub regions: RegionParams,
    pub filter: FilterParams,
    pub ocr: OcrParams,
    pub refine: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            segments: SegParams::default(),
            orientation_tol_deg: 30.0,
            ransac: RansacParams::default(),
            vertical_ransac: RansacParams {
                metric: InlierMetric::Sphere,
                ..RansacParams::default()
            },
            roll_trigger_deg: 2.0,
            regions: RegionParams::default(),
            filter: FilterParams::default(),
            ocr: OcrParams::default(),
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("no landmark text recognized")]
    NoLandmarkRecognized,
    #[error("recognized text matches no floor-plan landmark: {texts:?}")]
    UnknownLandmark { texts: Vec<String> },
    #[error("horizontal vanishing point: {0}")]
    NoConsensus(VpError),
    #[error("OCR engine failure: {0}")]
    EngineFailure(#[from] EngineFailure),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Pose(#[from] PoseError),
}

impl From<OcrError> for PipelineError {
    fn from(e: OcrError) -> Self {
        match e {
            OcrError::EngineFailure(f) => Self::EngineFailure(f),
            OcrError::NoLandmarkRecognized => Self::NoLandmarkRecognized,
        }
    }
}

/// Intermediate products of [`localize_image`], for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub roll: f64,
    pub roll_corrected: bool,
    pub segments: usize,
    pub horizontal_segments: usize,
    pub regions: usize,
    pub filtered_regions: usize,
    pub boxes: Vec<OcrBox>,
    pub horizontal_vp: Option<VanishingPoint>,
}

fn normalized(segs: &[LineSegment], k: &CameraIntrinsics) -> Result<Vec<LineSegment>, CameraError> {
    segs.iter().map(|s| to_normalized(s, k)).collect()
}

/// Horizontal vanishing point from pixel segments: normalizes, keeps the
/// near-horizontal ones and runs RANSAC.
pub fn horizontal_vp(
    segs_px: &[LineSegment],
    k: &CameraIntrinsics,
    cfg: &PipelineConfig,
) -> Result<(VanishingPoint, usize), PipelineError> {
    let split = split_by_orientation(segs_px, cfg.orientation_tol_deg);
    let h = normalized(&split.near_horizontal, k)?;
    let vp = ransac_vp(&h, &cfg.ransac).map_err(PipelineError::NoConsensus)?;
    Ok((vp, h.len()))
}

/// Roll from the near-vertical segments; `None` when there is no usable
/// vertical vanishing point.
pub fn roll_from_segments(segs_px: &[LineSegment], k: &CameraIntrinsics, cfg: &PipelineConfig) -> Option<f64> {
    let split = split_by_orientation(segs_px, cfg.orientation_tol_deg);
    let v = normalized(&split.near_vertical, k).ok()?;
    let vp = ransac_vp(&v, &cfg.vertical_ransac).ok()?;
    estimate_roll(&vp).ok()
}

/// Pose from already measured pixel segments and OCR box.
pub fn estimate_pose(
    segs_px: &[LineSegment],
    ocr_box: &OcrBox,
    lm: &Landmark,
    k: &CameraIntrinsics,
    cfg: &PipelineConfig,
) -> Result<PoseEstimate, PipelineError> {
    k.validate()?;
    let (vp, _) = horizontal_vp(segs_px, k, cfg)?;
    let w = ocr_width_normalized(ocr_box, k);
    Ok(solve_pose(HorizonX::from_vp(&vp), w, lm, cfg.refine)?)
}

/// Runs the whole chain on one image.
///
/// Stages: segments, vertical vanishing point and roll, derotation (only
/// above the trigger angle) and segment re-detection, horizontal vanishing
/// point, regions, filter, OCR preprocessing, recognition, landmark
/// selection, then angle, depth, refinement and the world position.
///
/// Recognition failures take precedence over vanishing-point failures, so a
/// blank image reports [`PipelineError::NoLandmarkRecognized`].
pub fn localize_image<E: OcrEngine + ?Sized>(
    img: &GrayImage,
    k: &CameraIntrinsics,
    plan: &FloorPlan,
    engine: &E,
    cfg: &PipelineConfig,
) -> Result<(PoseEstimate, Trace), PipelineError> {
    k.validate()?;
    let segs = detect_segments(img, &cfg.segments);
    let roll = roll_from_segments(&segs, k, cfg).unwrap_or(0.0);
    let (work, roll_corrected) = derotate(img, roll, k, cfg.roll_trigger_deg.to_radians());
    let segs = if roll_corrected {
        detect_segments(&work, &cfg.segments)
    } else {
        segs
    };
    let hvp = horizontal_vp(&segs, k, cfg);

    let regions = detect_regions(&work, &cfg.regions);
    let mut kept = geometric_filter(&regions, &cfg.filter);
    if cfg.regions.refine_boundary {
        kept = kept.iter().filter_map(|r| r.eroded()).collect();
    }
    let pre = preprocess_for_ocr(&work, &kept, &cfg.ocr);
    let boxes = recognize(engine, &pre, &cfg.ocr)?;
    if boxes.is_empty() {
        return Err(PipelineError::NoLandmarkRecognized);
    }
    let sel = select_landmark(&boxes, plan).map_err(|_| PipelineError::UnknownLandmark {
        texts: boxes.iter().map(|b| b.text.clone()).collect(),
    })?;

    let (vp, n_h) = hvp?;
    let w = ocr_width_normalized(&sel.ocr_box, k);
    let mut pose = solve_pose(HorizonX::from_vp(&vp), w, sel.landmark, cfg.refine)?;
    pose.flags.roll_corrected = roll_corrected;
    pose.flags.multiple_landmarks_seen = sel.distinct_landmarks > 1;
    pose.diagnostics.roll_rad = roll;
    let trace = Trace {
        roll,
        roll_corrected,
        segments: segs.len(),
        horizontal_segments: n_h,
        regions: regions.len(),
        filtered_regions: kept.len(),
        boxes,
        horizontal_vp: Some(vp),
    };
    Ok((pose, trace))
}
