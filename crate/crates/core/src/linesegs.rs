//! Straight line segments: a gradient region-growing detector, orientation
//! split, and the pixel -> normalized coordinate map.
//!
//! The detector follows the usual level-line scheme: Sobel gradients, seeds
//! visited in decreasing gradient magnitude, growth over 8-neighbours whose
//! level-line angle stays within `angle_tol_deg` of the running region angle,
//! then a magnitude-weighted principal-axis fit. There is no a-contrario
//! validation; short, thick or sparse regions are rejected by thresholds.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::camera::{CameraError, CameraIntrinsics};
use crate::geom::Point2;
use crate::image::GrayImage;

/// Implicit line `a·x + b·y + c = 0` with `a² + b² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LineCoeffs {
    /// Line through two distinct points; `None` if they coincide.
    pub fn through(p0: Point2, p1: Point2) -> Option<Self> {
        let d = p1 - p0;
        let len = d.norm();
        if !(len > 0.0) || !len.is_finite() {
            return None;
        }
        let a = -d.y / len;
        let b = d.x / len;
        Some(Self {
            a,
            b,
            c: -(a * p0.x + b * p0.y),
        })
    }

    pub fn eval(&self, p: Point2) -> f64 {
        self.a * p.x + self.b * p.y + self.c
    }

    pub fn distance(&self, p: Point2) -> f64 {
        self.eval(p).abs() / libm::hypot(self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub p0: Point2,
    pub p1: Point2,
    /// Length in pixels; kept in pixels after normalization because it is
    /// the evidence weight of the segment.
    pub length_px: f64,
    pub line: LineCoeffs,
}

impl LineSegment {
    /// Segment between two pixel points, weighted by its own length.
    pub fn new(p0: Point2, p1: Point2) -> Option<Self> {
        Self::with_length(p0, p1, p0.distance(p1))
    }

    pub fn with_length(p0: Point2, p1: Point2, length_px: f64) -> Option<Self> {
        if !(length_px > 0.0) {
            return None;
        }
        LineCoeffs::through(p0, p1).map(|line| Self {
            p0,
            p1,
            length_px,
            line,
        })
    }

    /// Angle from the x-axis folded into `[0°, 90°]`.
    pub fn folded_angle_deg(&self) -> f64 {
        let d = self.p1 - self.p0;
        libm::atan2(d.y.abs(), d.x.abs()).to_degrees()
    }

    pub fn direction(&self) -> Point2 {
        let d = self.p1 - self.p0;
        d * (1.0 / d.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegParams {
    pub min_length_px: f64,
    /// Minimum gradient magnitude (Sobel, normalized by 8) for a pixel to
    /// take part in a region.
    pub grad_threshold: f64,
    pub angle_tol_deg: f64,
    /// Regions whose spread across the fitted line exceeds this standard
    /// deviation are rejected.
    pub max_normal_std_px: f64,
    /// Minimum support pixels per pixel of segment length.
    pub min_density: f64,
}

impl Default for SegParams {
    fn default() -> Self {
        Self {
            min_length_px: 20.0,
            grad_threshold: 5.2,
            angle_tol_deg: 22.5,
            max_normal_std_px: 1.5,
            min_density: 0.7,
        }
    }
}

struct Gradient {
    mag: Vec<f64>,
    angle: Vec<f64>,
}

fn gradient(img: &GrayImage) -> Gradient {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut mag = vec![0.0; w * h];
    let mut angle = vec![0.0; w * h];
    if w < 3 || h < 3 {
        return Gradient { mag, angle };
    }
    let p = img.pixels();
    let at = |x: usize, y: usize| p[y * w + x] as f64;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x - 1, y)
                - at(x - 1, y + 1))
                / 8.0;
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x, y - 1)
                - at(x + 1, y - 1))
                / 8.0;
            mag[y * w + x] = libm::hypot(gx, gy);
            // level-line direction: gradient rotated by -90°
            angle[y * w + x] = libm::atan2(gx, -gy);
        }
    }
    Gradient { mag, angle }
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = a - b;
    while d > core::f64::consts::PI {
        d -= core::f64::consts::TAU;
    }
    while d < -core::f64::consts::PI {
        d += core::f64::consts::TAU;
    }
    d.abs()
}

fn fit_region(pixels: &[usize], grad: &Gradient, w: usize, params: &SegParams) -> Option<LineSegment> {
    let mut sw = 0.0;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &i in pixels {
        let m = grad.mag[i];
        sw += m;
        sx += m * (i % w) as f64;
        sy += m * (i / w) as f64;
    }
    let (cx, cy) = (sx / sw, sy / sw);
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for &i in pixels {
        let m = grad.mag[i];
        let dx = (i % w) as f64 - cx;
        let dy = (i / w) as f64 - cy;
        cxx += m * dx * dx;
        cyy += m * dy * dy;
        cxy += m * dx * dy;
    }
    cxx /= sw;
    cyy /= sw;
    cxy /= sw;
    let phi = 0.5 * libm::atan2(2.0 * cxy, cxx - cyy);
    let dir = Point2::new(libm::cos(phi), libm::sin(phi));
    let normal = Point2::new(-dir.y, dir.x);
    let centre = Point2::new(cx, cy);
    let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut spread = 0.0;
    for &i in pixels {
        let q = Point2::new((i % w) as f64, (i / w) as f64) - centre;
        let t = q.dot(dir);
        tmin = tmin.min(t);
        tmax = tmax.max(t);
        let n = q.dot(normal);
        spread += grad.mag[i] * n * n;
    }
    let normal_std = libm::sqrt(spread / sw);
    let length = tmax - tmin;
    if length < params.min_length_px || normal_std > params.max_normal_std_px {
        return None;
    }
    if (pixels.len() as f64) < params.min_density * length {
        return None;
    }
    let mut p0 = centre + dir * tmin;
    let mut p1 = centre + dir * tmax;
    if (p1.x, p1.y) < (p0.x, p0.y) {
        core::mem::swap(&mut p0, &mut p1);
    }
    LineSegment::new(p0, p1)
}

/// Detects straight segments. Output order follows seed order (strongest
/// gradient first) and is fully deterministic.
pub fn detect_segments(img: &GrayImage, params: &SegParams) -> Vec<LineSegment> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let grad = gradient(img);
    let tol = params.angle_tol_deg.to_radians();

    let mut seeds: Vec<usize> = (0..w * h).filter(|&i| grad.mag[i] > params.grad_threshold).collect();
    seeds.sort_by(|&a, &b| grad.mag[b].total_cmp(&grad.mag[a]).then(a.cmp(&b)));

    let mut used = vec![false; w * h];
    let mut out = Vec::new();
    let mut region = Vec::new();
    let mut stack = Vec::new();
    for seed in seeds {
        if used[seed] {
            continue;
        }
        used[seed] = true;
        region.clear();
        region.push(seed);
        stack.clear();
        stack.push(seed);
        let (mut sc, mut ss) = (libm::cos(grad.angle[seed]), libm::sin(grad.angle[seed]));
        let mut region_angle = grad.angle[seed];
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if used[j] || grad.mag[j] <= params.grad_threshold {
                        continue;
                    }
                    if angle_diff(grad.angle[j], region_angle) > tol {
                        continue;
                    }
                    used[j] = true;
                    region.push(j);
                    stack.push(j);
                    sc += libm::cos(grad.angle[j]);
                    ss += libm::sin(grad.angle[j]);
                    region_angle = libm::atan2(ss, sc);
                }
            }
        }
        if let Some(seg) = fit_region(&region, &grad, w, params) {
            out.push(seg);
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrientationSplit {
    pub near_horizontal: Vec<LineSegment>,
    pub near_vertical: Vec<LineSegment>,
    pub other: Vec<LineSegment>,
}

/// Partitions segments by folded angle: horizontal if `α < tol`, otherwise
/// vertical if `α > 90° - tol`, otherwise other.
pub fn split_by_orientation(segs: &[LineSegment], horiz_tol_deg: f64) -> OrientationSplit {
    let mut out = OrientationSplit::default();
    for s in segs {
        let a = s.folded_angle_deg();
        if a < horiz_tol_deg {
            out.near_horizontal.push(*s);
        } else if a > 90.0 - horiz_tol_deg {
            out.near_vertical.push(*s);
        } else {
            out.other.push(*s);
        }
    }
    out
}

/// Maps a pixel segment into normalized camera coordinates. The pixel
/// length is carried over unchanged.
pub fn to_normalized(seg: &LineSegment, k: &CameraIntrinsics) -> Result<LineSegment, CameraError> {
    k.validate()?;
    let p0 = k.to_normalized(seg.p0);
    let p1 = k.to_normalized(seg.p1);
    LineSegment::with_length(p0, p1, seg.length_px).ok_or(CameraError::InvalidIntrinsics)
}

/// Inverse of [`to_normalized`].
pub fn to_pixels(seg: &LineSegment, k: &CameraIntrinsics) -> Result<LineSegment, CameraError> {
    k.validate()?;
    LineSegment::with_length(k.to_pixel(seg.p0), k.to_pixel(seg.p1), seg.length_px)
        .ok_or(CameraError::InvalidIntrinsics)
}
