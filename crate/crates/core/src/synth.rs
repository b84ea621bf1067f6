//! Synthetic pinhole camera in front of a character plate.
//!
//! The projection code here multiplies rotation matrices and intersects
//! image lines; it never calls the closed-form pose formulas, so it can be
//! used to check them. The exceptions are [`generate_segments`], which
//! places its bundle on the formula vanishing point, and the report
//! builders, which tabulate the formulas themselves.

pub mod render;

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::camera::CameraIntrinsics;
use crate::geom::{mat_mul, mat_vec, Mat3, Point2, Point3};
use crate::linesegs::LineSegment;
use crate::ocr::OcrBox;
use crate::pose::{self, HorizonX};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("a box corner is behind the camera")]
    BehindCamera,
    #[error("invalid scene: {0}")]
    InvalidScene(&'static str),
}

/// Camera at depth `d` and pan `theta` from a plate of size `box_w` × `box_h`
/// centred at the landmark origin, with tilt `phi` and roll `roll`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticScene {
    pub d: f64,
    pub theta: f64,
    pub phi: f64,
    pub roll: f64,
    pub box_w: f64,
    pub box_h: f64,
    pub k: CameraIntrinsics,
    pub image_size: [u32; 2],
    pub noise_px: f64,
    pub seed: u64,
}

impl Default for SyntheticScene {
    fn default() -> Self {
        Self {
            d: 1.5,
            theta: 0.0,
            phi: 0.0,
            roll: 0.0,
            box_w: 0.1,
            box_h: 0.05,
            k: CameraIntrinsics {
                fx: 1000.0,
                fy: 1000.0,
                cx: 640.0,
                cy: 360.0,
            },
            image_size: [1280, 720],
            noise_px: 0.0,
            seed: 0,
        }
    }
}

fn rot_pan(t: f64) -> Mat3 {
    let (s, c) = libm::sincos(t);
    [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]]
}

fn rot_tilt(p: f64) -> Mat3 {
    let (s, c) = libm::sincos(p);
    let flip = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
    mat_mul(&flip, &[[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
}

fn rot_roll(r: f64) -> Mat3 {
    let (s, c) = libm::sincos(r);
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

impl SyntheticScene {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.d > 0.0) {
            return Err(SynthError::InvalidScene("d must be positive"));
        }
        if !(self.box_w > 0.0 && self.box_h > 0.0) {
            return Err(SynthError::InvalidScene("box size must be positive"));
        }
        if !(self.theta.abs() < core::f64::consts::FRAC_PI_2) {
            return Err(SynthError::InvalidScene("|theta| must be below 90 degrees"));
        }
        self.k
            .validate()
            .map_err(|_| SynthError::InvalidScene("invalid intrinsics"))
    }

    /// World-to-camera rotation, roll · tilt · pan.
    pub fn rotation(&self) -> Mat3 {
        mat_mul(&rot_roll(self.roll), &mat_mul(&rot_tilt(self.phi), &rot_pan(self.theta)))
    }

    /// Camera centre in the landmark frame.
    pub fn center(&self) -> Point3 {
        Point3::new(self.d * libm::sin(self.theta), 0.0, self.d * libm::cos(self.theta))
    }

    pub fn to_camera(&self, p: Point3) -> Point3 {
        mat_vec(&self.rotation(), p - self.center())
    }

    /// Normalized image coordinates of a landmark-frame point.
    pub fn project_normalized(&self, p: Point3) -> Result<Point2, SynthError> {
        let c = self.to_camera(p);
        if !(c.z > 0.0) {
            return Err(SynthError::BehindCamera);
        }
        Ok(Point2::new(c.x / c.z, c.y / c.z))
    }

    pub fn project_pixel(&self, p: Point3) -> Result<Point2, SynthError> {
        self.project_normalized(p).map(|n| self.k.to_pixel(n))
    }

    /// Box corners top-left, top-right, bottom-right, bottom-left.
    pub fn box_corners(&self) -> [Point3; 4] {
        let (hw, hh) = (self.box_w / 2.0, self.box_h / 2.0);
        [
            Point3::new(-hw, hh, 0.0),
            Point3::new(hw, hh, 0.0),
            Point3::new(hw, -hh, 0.0),
            Point3::new(-hw, -hh, 0.0),
        ]
    }

    /// Vanishing direction of the landmark x-axis in homogeneous normalized
    /// coordinates.
    pub fn horizontal_direction(&self) -> Point3 {
        mat_vec(&self.rotation(), Point3::new(1.0, 0.0, 0.0))
    }

    pub fn vertical_direction(&self) -> Point3 {
        mat_vec(&self.rotation(), Point3::new(0.0, 1.0, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectedBox {
    /// Pixel corners, top-left, top-right, bottom-right, bottom-left.
    pub corners: [Point2; 4],
}

impl ProjectedBox {
    /// Axis-aligned pixel bounding box `(x_min, y_min, width, height)`.
    pub fn bounds(&self) -> [f64; 4] {
        let xs = self.corners.map(|p| p.x);
        let ys = self.corners.map(|p| p.y);
        let fold = |v: [f64; 4]| {
            v.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
        };
        let (x0, x1) = fold(xs);
        let (y0, y1) = fold(ys);
        [x0, y0, x1 - x0, y1 - y0]
    }

    /// The box an ideal OCR engine would report for this plate.
    pub fn ocr_box(&self, text: &str) -> OcrBox {
        let [x_min, y_min, width, height] = self.bounds();
        OcrBox {
            text: String::from(text),
            x_min,
            y_min,
            width,
            height,
            confidence: 1.0,
        }
    }
}

/// Projects the plate corners to pixels, adding Gaussian noise of
/// `noise_px` drawn from `seed`.
pub fn project_box(scene: &SyntheticScene) -> Result<ProjectedBox, SynthError> {
    let mut corners = [Point2::new(0.0, 0.0); 4];
    for (c, x) in corners.iter_mut().zip(scene.box_corners()) {
        *c = scene.project_pixel(x)?;
    }
    if scene.noise_px > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
        let n = Normal::new(0.0, scene.noise_px).map_err(|_| SynthError::InvalidScene("noise"))?;
        for c in &mut corners {
            c.x += n.sample(&mut rng);
            c.y += n.sample(&mut rng);
        }
    }
    Ok(ProjectedBox { corners })
}

fn homog(p: Point2) -> Point3 {
    Point3::new(p.x, p.y, 1.0)
}

/// Intersection of the top edge (corner 1 to 2) and the bottom edge
/// (corner 4 to 3), in normalized coordinates.
pub fn numeric_xhor(b: &ProjectedBox, k: &CameraIntrinsics) -> HorizonX {
    let n = b.corners.map(|p| homog(k.to_normalized(p)));
    let top = n[0].cross(n[1]);
    let bottom = n[3].cross(n[2]);
    let v = top.cross(bottom);
    if v.z == 0.0 || v.z.abs() <= 1e-15 * libm::hypot(v.x, v.y) {
        HorizonX::AtInfinity
    } else {
        HorizonX::Finite(v.x / v.z)
    }
}

/// Normalized image width: top edge for positive tilt, bottom edge for
/// negative tilt.
pub fn numeric_w(b: &ProjectedBox, k: &CameraIntrinsics, phi: f64) -> f64 {
    let n = b.corners.map(|p| k.to_normalized(p));
    if phi < 0.0 {
        n[2].x - n[3].x
    } else {
        n[1].x - n[0].x
    }
}

/// Segment bundle for vanishing-point tests, in pixel coordinates.
///
/// Inliers lie on lines through the scene's horizontal vanishing point, whose
/// x coordinate comes from the tilt formula and whose y coordinate comes from
/// the projected horizontal direction. Each inlier is centred on a uniform
/// point of the image, 40 to 200 px long, with Gaussian endpoint noise
/// `noise_px`. Outliers share the inlier length distribution but have a
/// uniform centre and direction, so length weighting cannot tell them apart.
pub fn generate_segments(
    scene: &SyntheticScene,
    n_inliers: usize,
    n_outliers: usize,
    noise_px: f64,
) -> Result<Vec<LineSegment>, SynthError> {
    if n_inliers < 2 {
        return Err(SynthError::InvalidScene("need at least 2 inliers"));
    }
    let k = scene.k;
    let dir = scene.horizontal_direction();
    let x_hor = pose::tilted_xhor(scene.d, scene.theta, scene.phi, scene.box_w, scene.box_h)
        .map_err(|_| SynthError::InvalidScene("vanishing point undefined"))?;
    let vp = match x_hor {
        HorizonX::Finite(x) if dir.z != 0.0 && scene.roll == 0.0 => Some(k.to_pixel(Point2::new(x, dir.y / dir.z))),
        _ if dir.z.abs() > 1e-12 * libm::hypot(dir.x, dir.y) => {
            Some(k.to_pixel(Point2::new(dir.x / dir.z, dir.y / dir.z)))
        }
        _ => None,
    };
    // pixel direction of the bundle when the vanishing point is at infinity
    let far = Point2::new(dir.x * k.fx, dir.y * k.fy);
    let far = far * (1.0 / far.norm());

    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    let noise = Normal::new(0.0, noise_px.max(0.0)).map_err(|_| SynthError::InvalidScene("noise"))?;
    let [iw, ih] = scene.image_size.map(|v| v as f64);
    let mut out = Vec::with_capacity(n_inliers + n_outliers);
    while out.len() < n_inliers {
        let centre = Point2::new(rng.random_range(0.0..iw), rng.random_range(0.0..ih));
        let len: f64 = rng.random_range(40.0..200.0);
        let u = match vp {
            Some(v) if v.distance(centre) > 1e-9 => {
                let d = centre - v;
                d * (1.0 / d.norm())
            }
            Some(_) => continue,
            None => far,
        };
        let mut p = centre - u * (len / 2.0);
        let mut q = centre + u * (len / 2.0);
        if noise_px > 0.0 {
            p = p + Point2::new(noise.sample(&mut rng), noise.sample(&mut rng));
            q = q + Point2::new(noise.sample(&mut rng), noise.sample(&mut rng));
        }
        if let Some(s) = LineSegment::new(p, q) {
            out.push(s);
        }
    }
    while out.len() < n_inliers + n_outliers {
        let centre = Point2::new(rng.random_range(0.0..iw), rng.random_range(0.0..ih));
        let len: f64 = rng.random_range(40.0..200.0);
        let phi: f64 = rng.random_range(0.0..core::f64::consts::PI);
        let u = Point2::new(libm::cos(phi), libm::sin(phi));
        out.extend(LineSegment::new(centre - u * (len / 2.0), centre + u * (len / 2.0)));
    }
    Ok(out)
}

/// Parameters of the angle and depth error sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveConfig {
    pub d: f64,
    pub box_w: f64,
    pub box_h: f64,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub theta_step_deg: f64,
    /// Skip `theta = 0`, where the vanishing point is at infinity.
    pub exclude_zero: bool,
    pub phi_deg: Vec<f64>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            d: 1.5,
            box_w: 0.1,
            box_h: 0.05,
            theta_min_deg: -45.0,
            theta_max_deg: 45.0,
            theta_step_deg: 1.0,
            exclude_zero: true,
            phi_deg: (-30..=30).step_by(5).map(f64::from).collect(),
        }
    }
}

impl CurveConfig {
    pub fn theta_grid(&self) -> Vec<f64> {
        let n = libm::round((self.theta_max_deg - self.theta_min_deg) / self.theta_step_deg) as i64;
        (0..=n)
            .map(|i| self.theta_min_deg + i as f64 * self.theta_step_deg)
            .filter(|t| !(self.exclude_zero && t.abs() < 1e-9))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub phi_deg: f64,
    /// RMS of `-1/x_hor - theta` in degrees.
    pub theta_rms_deg: f64,
    /// RMS of the relative depth error with the true angle of view.
    pub depth_rms_norm: f64,
    /// Same, with the angle estimated from `x_hor`.
    pub depth_rms_norm_est_theta: f64,
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x * x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        libm::sqrt(s / n as f64)
    }
}

/// Error curves of the angle and depth estimators against tilt.
pub fn rms_curves(cfg: &CurveConfig) -> Vec<CurveRow> {
    let thetas: Vec<f64> = cfg.theta_grid().into_iter().map(f64::to_radians).collect();
    cfg.phi_deg
        .iter()
        .map(|&phi_deg| {
            let phi = phi_deg.to_radians();
            let mut th = Vec::with_capacity(thetas.len());
            let mut dt = Vec::with_capacity(thetas.len());
            let mut de = Vec::with_capacity(thetas.len());
            for &t in &thetas {
                let x = pose::tilted_xhor(cfg.d, t, phi, cfg.box_w, cfg.box_h).unwrap_or(HorizonX::AtInfinity);
                let (est, _) = pose::aov_from_xhor(x);
                th.push(est - t);
                if let Ok(w) = pose::tilted_w(cfg.d, t, phi, cfg.box_w, cfg.box_h) {
                    if let Ok(d) = pose::estimate_depth(t, cfg.box_w, w) {
                        dt.push((d - cfg.d) / cfg.d);
                    }
                    if let Ok(d) = pose::estimate_depth(est, cfg.box_w, w) {
                        de.push((d - cfg.d) / cfg.d);
                    }
                }
            }
            CurveRow {
                phi_deg,
                theta_rms_deg: rms(th.into_iter()).to_degrees(),
                depth_rms_norm: rms(dt.into_iter()),
                depth_rms_norm_est_theta: rms(de.into_iter()),
            }
        })
        .collect()
}

/// RMS of `-1/x_hor - theta` (degrees) for zero tilt over the configured
/// angle grid.
pub fn aov_rms_deg(cfg: &CurveConfig) -> f64 {
    let errs = cfg.theta_grid().into_iter().map(|deg| {
        let t = deg.to_radians();
        let x = pose::exact_xhor(cfg.d, t, cfg.box_w).unwrap_or(HorizonX::AtInfinity);
        pose::aov_from_xhor(x).0 - t
    });
    rms(errs).to_degrees()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensitivityConfig {
    /// Focal length (px) for the angle table.
    pub focal_px: f64,
    /// Vanishing-point x values (px) for the angle table. Values below
    /// about `0.64·focal_px` fall in the clamped range of the estimator.
    pub xhor_px: Vec<f64>,
    pub box_w: f64,
    /// Depth used for the angle-of-view table of depth sensitivity.
    pub d: f64,
    pub theta_deg: Vec<f64>,
    /// Depths for the width table, all at `theta = 0`.
    pub depths: Vec<f64>,
    /// Focal length (px) for the width table.
    pub width_focal_px: f64,
    /// Relative step of the central differences.
    pub rel_step: f64,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            focal_px: 1000.0,
            xhor_px: (7..=30).map(|i| f64::from(i) * 100.0).collect(),
            box_w: 0.1,
            d: 7.0,
            theta_deg: (-45..=45).step_by(5).map(f64::from).collect(),
            depths: (1..=20).map(f64::from).collect(),
            width_focal_px: 3500.0,
            rel_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub x_var: f64,
    pub analytic: f64,
    pub finite_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    /// `x_var` = vanishing-point x in px; values in degrees per pixel.
    pub theta_vs_xhor: Vec<SensitivityRow>,
    /// `x_var` = angle of view in degrees; values in metres per degree.
    pub depth_vs_theta: Vec<SensitivityRow>,
    /// `x_var` = image width in px; values are |∂d/∂w| in metres per pixel.
    pub depth_vs_width: Vec<SensitivityRow>,
}

fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Analytic derivatives next to central differences of the estimators.
pub fn sensitivity_report(cfg: &SensitivityConfig) -> SensitivityReport {
    let f = cfg.focal_px;
    let theta_vs_xhor = cfg
        .xhor_px
        .iter()
        .map(|&x_px| {
            let x = x_px / f;
            let aov = |x: f64| pose::aov_from_xhor(HorizonX::Finite(x)).0;
            SensitivityRow {
                x_var: x_px,
                analytic: (pose::aov_sensitivity(x) / f).to_degrees(),
                finite_diff: (central(aov, x, cfg.rel_step * x.abs()) / f).to_degrees(),
            }
        })
        .collect();

    let w_at = |t: f64| pose::exact_w(cfg.d, t, cfg.box_w).unwrap_or(f64::NAN);
    let depth_vs_theta = cfg
        .theta_deg
        .iter()
        .map(|&deg| {
            let t = deg.to_radians();
            let w = w_at(t);
            let depth = |t: f64| pose::estimate_depth(t, cfg.box_w, w).unwrap_or(f64::NAN);
            let h = cfg.rel_step * (1.0 + t.abs());
            let per_deg = core::f64::consts::PI / 180.0;
            SensitivityRow {
                x_var: deg,
                analytic: pose::depth_sensitivity_theta(t, cfg.box_w, w) * per_deg,
                finite_diff: central(depth, t, h) * per_deg,
            }
        })
        .collect();

    let fw = cfg.width_focal_px;
    let depth_vs_width = cfg
        .depths
        .iter()
        .map(|&d| {
            let w = cfg.box_w / d;
            let depth = |w: f64| pose::estimate_depth(0.0, cfg.box_w, w).unwrap_or(f64::NAN);
            SensitivityRow {
                x_var: w * fw,
                analytic: pose::depth_sensitivity_width(0.0, cfg.box_w, w).abs() / fw,
                finite_diff: central(depth, w, cfg.rel_step * w).abs() / fw,
            }
        })
        .collect();

    SensitivityReport {
        theta_vs_xhor,
        depth_vs_theta,
        depth_vs_width,
    }
}
