//! Angle of view, depth and floor-plane position from the horizontal
//! vanishing point and the OCR box width.
//!
//! All quantities are in normalized image coordinates (focal length 1).
//! Angles are radians; `theta` is positive when the camera stands on the
//! +x side of the landmark frame.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::camera::CameraIntrinsics;
use crate::floorplan::Landmark;
use crate::geom::Point3;
use crate::ocr::OcrBox;
use crate::vp::{VanishingPoint, VpKind};

/// Largest angle of view the estimators return.
pub const THETA_LIMIT: f64 = core::f64::consts::FRAC_PI_2 - 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PoseError {
    #[error("formula undefined at d = {d}, theta = {theta}")]
    Domain { d: f64, theta: f64 },
    #[error("image width must be positive, got {w}")]
    InvalidWidth { w: f64 },
}

/// x coordinate of the horizontal vanishing point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "x", rename_all = "snake_case")]
pub enum HorizonX {
    Finite(f64),
    AtInfinity,
}

impl HorizonX {
    pub fn from_vp(vp: &VanishingPoint) -> Self {
        match vp.kind {
            VpKind::Finite { x, .. } => Self::Finite(x),
            VpKind::AtInfinity { .. } => Self::AtInfinity,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(x) => Some(x),
            Self::AtInfinity => None,
        }
    }
}

/// Image width of the OCR box in normalized units.
pub fn ocr_width_normalized(b: &OcrBox, k: &CameraIntrinsics) -> f64 {
    b.width / k.fx
}

/// `θ ≈ -1/x_hor`, clamped to `±THETA_LIMIT`. The flag is set when the clamp
/// was active.
pub fn aov_from_xhor(x: HorizonX) -> (f64, bool) {
    match x {
        HorizonX::AtInfinity => (0.0, false),
        HorizonX::Finite(x) => {
            let t = -1.0 / x;
            if t.is_nan() {
                (0.0, false)
            } else if t.abs() > THETA_LIMIT {
                (THETA_LIMIT.copysign(t), true)
            } else {
                (t, false)
            }
        }
    }
}

pub fn estimate_aov(vp: &VanishingPoint) -> f64 {
    aov_from_xhor(HorizonX::from_vp(vp)).0
}

/// Vanishing-point x for a box of width `box_w` seen at depth `d` and angle
/// `theta` with zero tilt.
pub fn exact_xhor(d: f64, theta: f64, box_w: f64) -> Result<HorizonX, PoseError> {
    let s = libm::sin(theta);
    if s == 0.0 {
        return Ok(HorizonX::AtInfinity);
    }
    let c = libm::cos(theta);
    let num = 4.0 * d * d - box_w * box_w * s * s + 2.0 * d * box_w * s;
    let den = 4.0 * d * d * s - box_w * box_w * s * s * s;
    if den == 0.0 {
        return Err(PoseError::Domain { d, theta });
    }
    Ok(HorizonX::Finite(-c * num / den))
}

/// Image width of the box, zero tilt.
pub fn exact_w(d: f64, theta: f64, box_w: f64) -> Result<f64, PoseError> {
    let s = libm::sin(theta);
    let den = 4.0 * d * d - box_w * box_w * s * s;
    if den == 0.0 {
        return Err(PoseError::Domain { d, theta });
    }
    Ok(4.0 * d * box_w * libm::cos(theta) / den)
}

/// Depth from angle of view and image width (the physically valid root).
pub fn estimate_depth(theta: f64, box_w: f64, w: f64) -> Result<f64, PoseError> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(PoseError::InvalidWidth { w });
    }
    let t = libm::tan(theta);
    let root = libm::sqrt(1.0 + w * w * t * t);
    Ok(0.5 * libm::cos(theta) * (box_w / w) * (1.0 + root))
}

struct TiltTerms {
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
    s5: f64,
    s6: f64,
    s7: f64,
}

fn tilt_terms(d: f64, theta: f64, phi: f64, box_w: f64, box_h: f64) -> TiltTerms {
    let (sp, cp) = libm::sincos(phi);
    let (st, ct) = libm::sincos(theta);
    let s2p = libm::sin(2.0 * phi);
    let (w2, h2) = (box_w * box_w, box_h * box_h);
    TiltTerms {
        s1: 8.0 * d * d * d * cp * cp + 2.0 * d * h2 * sp * sp - 2.0 * d * w2 * cp * cp * st * st,
        s2: 4.0 * d * d * box_h * s2p + 4.0 * d * d * box_w * cp * cp * st - h2 * box_w * st * sp * sp,
        s3: 4.0 * d * d * cp * cp + h2 * sp * sp,
        s4: -w2 * cp * cp * st * st + 2.0 * d * box_h * s2p,
        s5: 2.0 * box_w * ct * (2.0 * d * cp - box_h * sp),
        s6: 4.0 * d * d * cp * cp + h2 * sp * sp,
        s7: -w2 * cp * cp * st * st - 2.0 * d * box_h * s2p,
    }
}

/// Vanishing-point x under camera tilt `phi`. The leading sign is chosen so
/// that `phi = 0` reproduces [`exact_xhor`].
pub fn tilted_xhor(d: f64, theta: f64, phi: f64, box_w: f64, box_h: f64) -> Result<HorizonX, PoseError> {
    let st = libm::sin(theta);
    if st == 0.0 {
        return Ok(HorizonX::AtInfinity);
    }
    let t = tilt_terms(d, theta, phi, box_w, box_h);
    let lead = 2.0 * d * libm::cos(phi) * st;
    let den = t.s3 + t.s4;
    if lead == 0.0 || den == 0.0 {
        return Err(PoseError::Domain { d, theta });
    }
    Ok(HorizonX::Finite(-libm::cos(theta) / lead * (t.s1 + t.s2) / den))
}

/// Image width under tilt: the wider of the top and bottom edges.
pub fn tilted_w(d: f64, theta: f64, phi: f64, box_w: f64, box_h: f64) -> Result<f64, PoseError> {
    let t = tilt_terms(d, theta, phi, box_w, box_h);
    let den = t.s6 + t.s7;
    if den == 0.0 {
        return Err(PoseError::Domain { d, theta });
    }
    Ok((t.s5 / den).abs())
}

/// `dθ/dx_hor` of the `-1/x` approximation.
pub fn aov_sensitivity(x: f64) -> f64 {
    1.0 / (x * x)
}

/// `∂d/∂w` of [`estimate_depth`].
pub fn depth_sensitivity_width(theta: f64, box_w: f64, w: f64) -> f64 {
    let t = libm::tan(theta);
    let s = libm::sqrt(1.0 + w * w * t * t);
    0.5 * libm::cos(theta) * box_w * (-(1.0 + s) / (w * w) + t * t / s)
}

/// `∂d/∂θ` of [`estimate_depth`].
pub fn depth_sensitivity_theta(theta: f64, box_w: f64, w: f64) -> f64 {
    let (st, ct) = libm::sincos(theta);
    let t = st / ct;
    let s = libm::sqrt(1.0 + w * w * t * t);
    0.5 * (box_w / w) * (-st * (1.0 + s) + w * w * t / (ct * s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub theta: f64,
    pub depth_m: f64,
    pub refined: bool,
    /// Max-norm residual after each accepted step, starting with the
    /// initial guess.
    pub residuals: Vec<f64>,
}

const REFINE_TOL: f64 = 1e-10;
const REFINE_MAX_ITER: usize = 50;

fn forward(d: f64, theta: f64, box_w: f64, x_meas: f64, w_meas: f64) -> Option<[f64; 2]> {
    let x = exact_xhor(d, theta, box_w).ok()?.finite()?;
    let w = exact_w(d, theta, box_w).ok()?;
    let r = [x - x_meas, w - w_meas];
    (r[0].is_finite() && r[1].is_finite()).then_some(r)
}

fn max_norm(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// Jointly solves the exact vanishing-point and width equations for
/// `(theta, d)` by damped Newton steps with a central-difference Jacobian.
/// Falls back to the initial values, with `refined = false`, when it does not
/// reach a residual below 1e-10 within 50 iterations.
pub fn refine_pose(theta0: f64, d0: f64, w_meas: f64, x_meas: HorizonX, box_w: f64) -> Refinement {
    let fallback = |residuals| Refinement {
        theta: theta0,
        depth_m: d0,
        refined: false,
        residuals,
    };
    let HorizonX::Finite(x_meas) = x_meas else {
        return Refinement {
            theta: 0.0,
            depth_m: box_w / w_meas,
            refined: false,
            residuals: Vec::new(),
        };
    };
    let valid = |t: f64, d: f64| t.abs() < THETA_LIMIT && t != 0.0 && d > box_w / 2.0;
    let (mut t, mut d) = (theta0, d0);
    if !valid(t, d) {
        return fallback(Vec::new());
    }
    let Some(mut r) = forward(d, t, box_w, x_meas, w_meas) else {
        return fallback(Vec::new());
    };
    let mut history = alloc::vec![max_norm(r)];
    for _ in 0..REFINE_MAX_ITER {
        if max_norm(r) < REFINE_TOL {
            return Refinement {
                theta: t,
                depth_m: d,
                refined: true,
                residuals: history,
            };
        }
        let ht = 1e-7 * (1.0 + t.abs());
        let hd = 1e-7 * d;
        let (Some(tp), Some(tm), Some(dp), Some(dm)) = (
            forward(d, t + ht, box_w, x_meas, w_meas),
            forward(d, t - ht, box_w, x_meas, w_meas),
            forward(d + hd, t, box_w, x_meas, w_meas),
            forward(d - hd, t, box_w, x_meas, w_meas),
        ) else {
            return fallback(history);
        };
        // columns: d/dθ, d/dd
        let j = [
            [(tp[0] - tm[0]) / (2.0 * ht), (dp[0] - dm[0]) / (2.0 * hd)],
            [(tp[1] - tm[1]) / (2.0 * ht), (dp[1] - dm[1]) / (2.0 * hd)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return fallback(history);
        }
        let step_t = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let step_d = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let (nt, nd) = (t - lambda * step_t, d - lambda * step_d);
            if valid(nt, nd) {
                if let Some(nr) = forward(nd, nt, box_w, x_meas, w_meas) {
                    if max_norm(nr) < max_norm(r) {
                        accepted = Some((nt, nd, nr));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let Some((nt, nd, nr)) = accepted else {
            return fallback(history);
        };
        t = nt;
        d = nd;
        r = nr;
        history.push(max_norm(r));
    }
    if max_norm(r) < REFINE_TOL {
        Refinement {
            theta: t,
            depth_m: d,
            refined: true,
            residuals: history,
        }
    } else {
        fallback(history)
    }
}

/// Camera position in the landmark frame, `(d·sinθ, d·cosθ)`.
pub fn local_position(theta: f64, d: f64) -> [f64; 2] {
    [d * libm::sin(theta), d * libm::cos(theta)]
}

/// Floor-plane world position of a camera at `(theta, d)` from `lm`.
pub fn localize(theta: f64, d: f64, lm: &Landmark) -> [f64; 2] {
    let [x, z] = local_position(theta, d);
    let p = lm.to_world(Point3::new(x, 0.0, z));
    [p.x, p.y]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoseFlags {
    pub roll_corrected: bool,
    pub vp_at_infinity: bool,
    pub multiple_landmarks_seen: bool,
    pub refined: bool,
    pub theta_clamped: bool,
}

/// Intermediate measurements behind a pose estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseDiagnostics {
    pub roll_rad: f64,
    pub x_hor: HorizonX,
    pub width_norm: f64,
    pub theta_initial: f64,
    pub depth_initial_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseEstimate {
    pub theta: f64,
    pub theta_deg: f64,
    pub depth_m: f64,
    /// `(X, Z)` in the landmark frame.
    pub local: [f64; 2],
    /// Floor-plane position in the world frame.
    pub world: [f64; 2],
    pub landmark_id: String,
    pub text: String,
    pub flags: PoseFlags,
    pub diagnostics: PoseDiagnostics,
}

/// Pose from measured `x_hor` and normalized width, optionally refined.
pub fn solve_pose(x_hor: HorizonX, width_norm: f64, lm: &Landmark, refine: bool) -> Result<PoseEstimate, PoseError> {
    let (theta0, clamped) = aov_from_xhor(x_hor);
    let d0 = estimate_depth(theta0, lm.box_width_m, width_norm)?;
    let mut flags = PoseFlags {
        vp_at_infinity: x_hor == HorizonX::AtInfinity,
        theta_clamped: clamped,
        ..PoseFlags::default()
    };
    let (theta, depth) = if refine && !clamped {
        let r = refine_pose(theta0, d0, width_norm, x_hor, lm.box_width_m);
        flags.refined = r.refined;
        (r.theta, r.depth_m)
    } else {
        (theta0, d0)
    };
    Ok(PoseEstimate {
        theta,
        theta_deg: theta.to_degrees(),
        depth_m: depth,
        local: local_position(theta, depth),
        world: localize(theta, depth, lm),
        landmark_id: lm.id.clone(),
        text: lm.text.clone(),
        flags,
        diagnostics: PoseDiagnostics {
            roll_rad: 0.0,
            x_hor,
            width_norm,
            theta_initial: theta0,
            depth_initial_m: d0,
        },
    })
}
