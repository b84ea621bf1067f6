//! Vanishing points: closed-form weighted least squares, a RANSAC wrapper,
//! roll from the vertical vanishing point and image derotation.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::camera::CameraIntrinsics;
use crate::geom::Point2;
use crate::image::GrayImage;
use crate::linesegs::LineSegment;

const DEGENERACY_TOL: f64 = 1e-12;
const TINY: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VpError {
    #[error("need at least 2 lines, got {got}")]
    InsufficientLines { got: usize },
    #[error("line weights must be positive and finite")]
    InvalidWeight,
    #[error("no consensus: best hypothesis has {best} inliers, {required} required")]
    NoConsensus { best: usize, required: usize },
    #[error("vertical vanishing point cannot give a roll angle")]
    DegenerateVerticalVp,
    #[error("invalid RANSAC parameters")]
    InvalidParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VpKind {
    Finite { x: f64, y: f64 },
    /// Direction angle (radians, in `[0, π)`) of the parallel image lines.
    AtInfinity { direction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingPoint {
    pub kind: VpKind,
    /// Indices into the input that support this point.
    pub support: Vec<usize>,
    /// Weighted RMS point-to-line distance over the support. For a point at
    /// infinity it is the weighted RMS sine of the angle between each line
    /// and the common direction.
    pub residual: f64,
}

impl VanishingPoint {
    pub fn finite(&self) -> Option<Point2> {
        match self.kind {
            VpKind::Finite { x, y } => Some(Point2::new(x, y)),
            VpKind::AtInfinity { .. } => None,
        }
    }
}

/// `a·x + b·y + c = 0` with a positive evidence weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub weight: f64,
}

impl WeightedLine {
    pub fn new(a: f64, b: f64, c: f64, weight: f64) -> Self {
        Self { a, b, c, weight }
    }

    pub fn from_segment(s: &LineSegment) -> Self {
        Self::new(s.line.a, s.line.b, s.line.c, s.length_px)
    }

    pub fn distance(&self, p: Point2) -> f64 {
        (self.a * p.x + self.b * p.y + self.c).abs() / libm::hypot(self.a, self.b)
    }

    /// Direction angle of the line folded into `[0, π)`.
    pub fn direction(&self) -> f64 {
        let t = libm::atan2(-self.a, self.b);
        if t < 0.0 {
            t + core::f64::consts::PI
        } else if t >= core::f64::consts::PI {
            t - core::f64::consts::PI
        } else {
            t
        }
    }
}

/// Weighted sum of squared point-to-line distances.
pub fn weighted_cost(lines: &[WeightedLine], p: Point2) -> f64 {
    lines
        .iter()
        .map(|l| {
            let r = l.a * p.x + l.b * p.y + l.c;
            l.weight * r * r / (l.a * l.a + l.b * l.b)
        })
        .sum()
}

fn axial_mean(lines: &[WeightedLine]) -> f64 {
    let (mut c, mut s) = (0.0, 0.0);
    for l in lines {
        let t = 2.0 * l.direction();
        c += l.weight * libm::cos(t);
        s += l.weight * libm::sin(t);
    }
    let mut t = 0.5 * libm::atan2(s, c);
    if t < 0.0 {
        t += core::f64::consts::PI;
    }
    t
}

fn residual(lines: &[WeightedLine], kind: VpKind) -> f64 {
    let total: f64 = lines.iter().map(|l| l.weight).sum();
    let acc: f64 = match kind {
        VpKind::Finite { x, y } => {
            let p = Point2::new(x, y);
            lines.iter().map(|l| l.weight * l.distance(p) * l.distance(p)).sum()
        }
        VpKind::AtInfinity { direction } => lines
            .iter()
            .map(|l| {
                let s = libm::sin(l.direction() - direction);
                l.weight * s * s
            })
            .sum(),
    };
    libm::sqrt(acc / total)
}

/// Closed-form minimizer of [`weighted_cost`].
pub fn solve_weighted_vp(lines: &[WeightedLine]) -> Result<VanishingPoint, VpError> {
    if lines.len() < 2 {
        return Err(VpError::InsufficientLines { got: lines.len() });
    }
    if lines.iter().any(|l| !(l.weight > 0.0) || !l.weight.is_finite()) {
        return Err(VpError::InvalidWeight);
    }
    let (mut a_, mut b_, mut c_, mut e_, mut f_) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for l in lines {
        let g = l.weight / (l.a * l.a + l.b * l.b);
        a_ += g * l.a * l.a;
        b_ += g * l.a * l.b;
        c_ += g * l.a * l.c;
        e_ += g * l.b * l.b;
        f_ += g * l.b * l.c;
    }
    let d_ = b_;
    let det = a_ * e_ - b_ * d_;
    let kind = if !(det.abs() >= DEGENERACY_TOL * ((a_ * e_).abs() + (b_ * d_).abs() + TINY)) {
        VpKind::AtInfinity {
            direction: axial_mean(lines),
        }
    } else {
        let x = (b_ * f_ - c_ * e_) / det;
        let y = (c_ * d_ - a_ * f_) / det;
        if x.is_finite() && y.is_finite() {
            VpKind::Finite { x, y }
        } else {
            VpKind::AtInfinity {
                direction: axial_mean(lines),
            }
        }
    };
    Ok(VanishingPoint {
        kind,
        support: (0..lines.len()).collect(),
        residual: residual(lines, kind),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacParams {
    pub iterations: u32,
    pub sample_size: usize,
    /// Normalized point-to-line distance below which a segment is an inlier.
    /// Against a point at infinity the same bound is applied to the sine of
    /// the angle between the segment and the common direction.
    pub inlier_threshold: f64,
    pub seed: u64,
    pub min_inliers: usize,
    /// Score hypotheses by summed inlier pixel length instead of count.
    pub length_weighted: bool,
    pub metric: InlierMetric,
}

/// How a segment is compared with a hypothesis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InlierMetric {
    /// Point-to-line distance in the normalized image plane.
    #[default]
    Image,
    /// Distance between the unit line normal and the unit vanishing
    /// direction `(x, y, 1)/|(x, y, 1)|`. Equal to the image distance scaled by
    /// `1/sqrt(1 + x² + y²)`, so it stays meaningful for points far away.
    Sphere,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            iterations: 500,
            sample_size: 2,
            inlier_threshold: 0.01,
            seed: 0,
            min_inliers: 3,
            length_weighted: true,
            metric: InlierMetric::Image,
        }
    }
}

fn inliers(lines: &[WeightedLine], kind: VpKind, threshold: f64, metric: InlierMetric) -> Vec<usize> {
    let scale = match (kind, metric) {
        (VpKind::Finite { x, y }, InlierMetric::Sphere) => libm::sqrt(1.0 + x * x + y * y),
        _ => 1.0,
    };
    lines
        .iter()
        .enumerate()
        .filter(|(_, l)| match kind {
            VpKind::Finite { x, y } => l.distance(Point2::new(x, y)) < threshold * scale,
            VpKind::AtInfinity { direction } => libm::sin(l.direction() - direction).abs() < threshold,
        })
        .map(|(i, _)| i)
        .collect()
}

/// RANSAC over [`solve_weighted_vp`] with segments in normalized
/// coordinates, each weighted by its pixel length.
///
/// Iteration `i` draws its sample from stream `i` of a ChaCha8 generator
/// seeded with `params.seed`, so the result does not depend on evaluation
/// order. With fewer segments than `min_inliers` the requirement drops to the
/// number of segments. The consensus set is refitted in closed form; the
/// refit replaces the winning hypothesis only if it scores at least as well
/// on the full input.
pub fn ransac_vp(segs: &[LineSegment], params: &RansacParams) -> Result<VanishingPoint, VpError> {
    if params.iterations == 0 || params.sample_size < 2 {
        return Err(VpError::InvalidParams);
    }
    let n = segs.len();
    if n < 2 {
        return Err(VpError::InsufficientLines { got: n });
    }
    let lines: Vec<WeightedLine> = segs.iter().map(WeightedLine::from_segment).collect();
    let k = params.sample_size.min(n);
    let iterations = if k == n { 1 } else { params.iterations };

    let score_of = |set: &[usize]| -> f64 {
        if params.length_weighted {
            set.iter().map(|&j| lines[j].weight).sum()
        } else {
            set.len() as f64
        }
    };
    let mut best: Option<(f64, Vec<usize>, VpKind)> = None;
    let mut picked = Vec::with_capacity(k);
    for i in 0..iterations {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(i as u64);
        picked.clear();
        picked.extend(sample(&mut rng, n, k).into_iter().map(|j| lines[j]));
        let Ok(h) = solve_weighted_vp(&picked) else {
            continue;
        };
        let set = inliers(&lines, h.kind, params.inlier_threshold, params.metric);
        let score = score_of(&set);
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, set, h.kind));
        }
    }

    let required = params.min_inliers.min(n);
    let (score, set, kind) = best.unwrap_or((0.0, Vec::new(), VpKind::AtInfinity { direction: 0.0 }));
    if set.len() < required || set.len() < 2 {
        return Err(VpError::NoConsensus {
            best: set.len(),
            required,
        });
    }
    let chosen: Vec<WeightedLine> = set.iter().map(|&j| lines[j]).collect();
    let refit = solve_weighted_vp(&chosen)?;
    // nearly parallel consensus sets can refit to a spurious finite point
    let kind = if score_of(&inliers(&lines, refit.kind, params.inlier_threshold, params.metric)) >= score {
        refit.kind
    } else {
        kind
    };
    Ok(VanishingPoint {
        kind,
        residual: residual(&chosen, kind),
        support: set,
    })
}

/// Roll angle from the vertical vanishing point: `atan(x / y)`.
///
/// A vertical point at infinity gives the angle its direction makes with the
/// image y-axis; directions more than 45° away from vertical are rejected.
pub fn estimate_roll(vertical: &VanishingPoint) -> Result<f64, VpError> {
    match vertical.kind {
        VpKind::Finite { x, y } => {
            if y == 0.0 {
                Err(VpError::DegenerateVerticalVp)
            } else {
                Ok(libm::atan(x / y))
            }
        }
        VpKind::AtInfinity { direction } => {
            let (s, c) = libm::sincos(direction);
            if s.abs() < c.abs() {
                Err(VpError::DegenerateVerticalVp)
            } else {
                Ok(libm::atan(c / s))
            }
        }
    }
}

/// Rotates the image about the principal point so that a camera roll
/// estimated as `roll` is removed. Returns the input unchanged when
/// `|roll| <= trigger`; the flag reports whether a rotation was applied.
pub fn derotate(img: &GrayImage, roll: f64, k: &CameraIntrinsics, trigger: f64) -> (GrayImage, bool) {
    if !(roll.abs() > trigger) {
        return (img.clone(), false);
    }
    let (s, c) = libm::sincos(roll);
    let out = GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let n = k.to_normalized(Point2::new(x as f64, y as f64));
        // inverse of p_out = R(roll) p_in
        let src = k.to_pixel(Point2::new(c * n.x + s * n.y, -s * n.x + c * n.y));
        libm::round(img.sample_bilinear(src.x, src.y)) as u8
    });
    (out, true)
}
