//! Character-tagged floor plans and the landmark coordinate frame.
//!
//! A landmark frame has its origin at the centroid of the printed
//! characters, `z` along the wall normal into walkable space, `y` along the
//! world vertical and `x = y × z` running along the wall. A camera at
//! angle-of-view `θ` and depth `d` sits at `(d·sinθ, 0, d·cosθ)` in that frame.
//!
//! World coordinates are metric with `z` up; wall normals live in the floor
//! plane.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::Point3;

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub id: String,
    /// Characters as printed on the plate, e.g. `"4010"`.
    pub text: String,
    /// Characters centroid, world frame, meters.
    pub anchor: [f64; 3],
    /// Unit vector in the floor plane pointing away from the wall.
    pub wall_normal: [f64; 2],
    /// Physical width of the OCR box, meters.
    pub box_width_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_height_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroid_height_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPlan {
    pub name: String,
    pub units: String,
    pub landmarks: Vec<Landmark>,
}

/// A single broken floor-plan invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    #[error("units must be \"meters\", found {units:?}")]
    Units { units: String },
    #[error("landmark #{index} has empty text")]
    EmptyText { index: usize },
    #[error("landmark #{index} has empty id")]
    EmptyId { index: usize },
    #[error("text {text:?} appears on landmarks #{first} and #{second}")]
    DuplicateText {
        text: String,
        first: usize,
        second: usize,
    },
    #[error("id {id:?} appears on landmarks #{first} and #{second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },
    #[error("landmark {id:?} wall normal has length {norm}, expected 1")]
    NonUnitNormal { id: String, norm: f64 },
    #[error("landmark {id:?} box width {width} must be positive")]
    NonPositiveWidth { id: String, width: f64 },
    #[error("landmark {id:?} box height {height} must be positive")]
    NonPositiveHeight { id: String, height: f64 },
    #[error("landmark {id:?} anchor has non-finite coordinates")]
    NonFiniteAnchor { id: String },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FloorPlanError {
    #[error("floor plan failed validation ({} violation(s))", .0.len())]
    Validation(Vec<Violation>),
    #[error("no landmark with text {0:?}")]
    UnknownLandmark(String),
}

impl Landmark {
    fn normal3(&self) -> Point3 {
        Point3::new(self.wall_normal[0], self.wall_normal[1], 0.0)
    }

    pub fn anchor_point(&self) -> Point3 {
        Point3::new(self.anchor[0], self.anchor[1], self.anchor[2])
    }

    /// Unit vector along the wall, `up × wall_normal`.
    pub fn wall_axis(&self) -> Point3 {
        UP.cross(self.normal3())
    }

    /// Maps a point from this landmark's frame to the world frame.
    pub fn to_world(&self, local: Point3) -> Point3 {
        self.anchor_point() + self.wall_axis() * local.x + UP * local.y + self.normal3() * local.z
    }
}

const UP: Point3 = Point3::new(0.0, 0.0, 1.0);

/// Free-function form of [`Landmark::to_world`].
pub fn landmark_to_world(lm: &Landmark, local: Point3) -> Point3 {
    lm.to_world(local)
}

fn normalize_text(text: &str) -> &str {
    text.trim()
}

impl FloorPlan {
    /// Every invariant violation, in document order. Empty means valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.units != "meters" {
            out.push(Violation::Units {
                units: self.units.clone(),
            });
        }
        for (i, lm) in self.landmarks.iter().enumerate() {
            if normalize_text(&lm.text).is_empty() {
                out.push(Violation::EmptyText { index: i });
            }
            if lm.id.is_empty() {
                out.push(Violation::EmptyId { index: i });
            }
            if let Some(j) = self.landmarks[..i]
                .iter()
                .position(|o| normalize_text(&o.text) == normalize_text(&lm.text))
            {
                out.push(Violation::DuplicateText {
                    text: String::from(normalize_text(&lm.text)),
                    first: j,
                    second: i,
                });
            }
            if let Some(j) = self.landmarks[..i].iter().position(|o| o.id == lm.id) {
                out.push(Violation::DuplicateId {
                    id: lm.id.clone(),
                    first: j,
                    second: i,
                });
            }
            let norm = libm::hypot(lm.wall_normal[0], lm.wall_normal[1]);
            if !((norm - 1.0).abs() <= UNIT_TOL) {
                out.push(Violation::NonUnitNormal {
                    id: lm.id.clone(),
                    norm,
                });
            }
            if !(lm.box_width_m > 0.0 && lm.box_width_m.is_finite()) {
                out.push(Violation::NonPositiveWidth {
                    id: lm.id.clone(),
                    width: lm.box_width_m,
                });
            }
            if let Some(h) = lm.box_height_m {
                if !(h > 0.0 && h.is_finite()) {
                    out.push(Violation::NonPositiveHeight {
                        id: lm.id.clone(),
                        height: h,
                    });
                }
            }
            if !lm.anchor.iter().all(|v| v.is_finite()) {
                out.push(Violation::NonFiniteAnchor { id: lm.id.clone() });
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), FloorPlanError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(FloorPlanError::Validation(v))
        }
    }

    /// Consumes a freshly parsed plan and returns it only if it is valid.
    pub fn validated(self) -> Result<Self, FloorPlanError> {
        self.validate().map(|_| self)
    }

    /// Exact, case-sensitive match after trimming surrounding whitespace.
    pub fn lookup(&self, text: &str) -> Result<&Landmark, FloorPlanError> {
        let wanted = normalize_text(text);
        self.landmarks
            .iter()
            .find(|lm| normalize_text(&lm.text) == wanted)
            .ok_or_else(|| FloorPlanError::UnknownLandmark(String::from(wanted)))
    }

    pub fn contains_text(&self, text: &str) -> bool {
        self.lookup(text).is_ok()
    }
}
