//! Ray-cast raster of the synthetic wall: horizontal bands, vertical frames,
//! and a white plate carrying the landmark text in a 5x7 bitmap font that
//! exactly fills the `box_w` × `box_h` box.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::SyntheticScene;
use crate::geom::{mat_vec, transpose, Point2, Point3};
use crate::image::GrayImage;

const GLYPH_W: usize = 5;
const GLYPH_H: usize = 7;

/// Rows top to bottom, most significant of the low 5 bits is the left column.
fn glyph(c: char) -> Option<[u8; GLYPH_H]> {
    Some(match c.to_ascii_uppercase() {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        _ => return None,
    })
}

/// Whether `(col, row)` of a text laid out on a `(6n - 1) × 7` cell grid is
/// ink. Characters are 5 cells wide with a 1-cell gap.
fn text_ink(text: &[char], col: usize, row: usize) -> bool {
    let (ch, x) = (col / (GLYPH_W + 1), col % (GLYPH_W + 1));
    if x == GLYPH_W || ch >= text.len() || row >= GLYPH_H {
        return false;
    }
    glyph(text[ch]).is_some_and(|g| g[row] >> (GLYPH_W - 1 - x) & 1 == 1)
}

fn grid_columns(n: usize) -> usize {
    (GLYPH_W + 1) * n - 1
}

/// Ink test at text-box coordinates `u ∈ [0, 1)` left to right and
/// `v ∈ [0, 1)` top to bottom.
fn ink_at(text: &[char], u: f64, v: f64) -> bool {
    if text.is_empty() || !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&v) {
        return false;
    }
    let col = (u * grid_columns(text.len()) as f64) as usize;
    let row = (v * GLYPH_H as f64) as usize;
    text_ink(text, col, row)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WallStyle {
    pub wall: u8,
    pub plate: u8,
    pub ink: u8,
    pub band: u8,
    pub frame: u8,
    /// Heights (m) of horizontal bands, centre lines.
    pub bands: Vec<f64>,
    /// Positions (m) of vertical frames along the wall.
    pub frames: Vec<f64>,
    pub stroke_m: f64,
    /// Plate margin around the text box as a fraction of the box height.
    pub plate_margin: f64,
}

impl Default for WallStyle {
    fn default() -> Self {
        Self {
            wall: 170,
            plate: 240,
            ink: 20,
            band: 70,
            frame: 90,
            bands: alloc::vec![-0.6, -0.3, 0.3, 0.6],
            frames: alloc::vec![-0.8, -0.4, 0.4, 0.8],
            stroke_m: 0.02,
            plate_margin: 0.4,
        }
    }
}

impl WallStyle {
    fn shade(&self, text: &[char], box_w: f64, box_h: f64, p: Point2) -> f64 {
        let (hw, hh) = (box_w / 2.0, box_h / 2.0);
        let m = self.plate_margin * box_h;
        if p.x.abs() <= hw + m && p.y.abs() <= hh + m {
            let u = (p.x + hw) / box_w;
            let v = (hh - p.y) / box_h;
            return if ink_at(text, u, v) {
                self.ink as f64
            } else {
                self.plate as f64
            };
        }
        let half = self.stroke_m / 2.0;
        if self.frames.iter().any(|&f| (p.x - f).abs() <= half) {
            return self.frame as f64;
        }
        if self.bands.iter().any(|&b| (p.y - b).abs() <= half) {
            return self.band as f64;
        }
        self.wall as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderParams {
    /// Samples per pixel along each axis.
    pub supersample: u32,
    pub style: WallStyle,
    /// Value for rays that miss the wall.
    pub background: u8,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            supersample: 3,
            style: WallStyle::default(),
            background: 128,
        }
    }
}

/// Renders the scene's wall as seen by its camera.
pub fn render_scene(scene: &SyntheticScene, text: &str, params: &RenderParams) -> GrayImage {
    let chars: Vec<char> = text.chars().collect();
    let rt = transpose(&scene.rotation());
    let c = scene.center();
    let k = scene.k;
    let n = params.supersample.max(1);
    let step = 1.0 / n as f64;
    let [w, h] = scene.image_size;
    GrayImage::from_fn(w, h, |px, py| {
        let mut acc = 0.0;
        for sy in 0..n {
            for sx in 0..n {
                let q = Point2::new(
                    px as f64 - 0.5 + (sx as f64 + 0.5) * step,
                    py as f64 - 0.5 + (sy as f64 + 0.5) * step,
                );
                let r = k.to_normalized(q);
                let dir = mat_vec(&rt, Point3::new(r.x, r.y, 1.0));
                let t = -c.z / dir.z;
                acc += if t > 0.0 && t.is_finite() {
                    let hit = c + dir * t;
                    params.style.shade(&chars, scene.box_w, scene.box_h, Point2::new(hit.x, hit.y))
                } else {
                    params.background as f64
                };
            }
        }
        libm::round(acc / (n * n) as f64) as u8
    })
}

/// Fronto-parallel black-on-white text, anti-aliased by `supersample` and
/// shifted by a sub-pixel `offset`. Returns the image and the ink mask
/// (pixel centre inside a glyph cell).
pub fn render_text(
    text: &str,
    cell_px: f64,
    margin_px: u32,
    offset: Point2,
    supersample: u32,
) -> (GrayImage, Vec<bool>) {
    let chars: Vec<char> = text.chars().collect();
    let tw = grid_columns(chars.len().max(1)) as f64 * cell_px;
    let th = GLYPH_H as f64 * cell_px;
    let w = libm::ceil(tw) as u32 + 2 * margin_px + 1;
    let h = libm::ceil(th) as u32 + 2 * margin_px + 1;
    let origin = Point2::new(margin_px as f64 + offset.x, margin_px as f64 + offset.y);
    let inside = |x: f64, y: f64| ink_at(&chars, (x - origin.x) / tw, (y - origin.y) / th);
    let n = supersample.max(1);
    let step = 1.0 / n as f64;
    let img = GrayImage::from_fn(w, h, |px, py| {
        let mut ink = 0u32;
        for sy in 0..n {
            for sx in 0..n {
                let x = px as f64 - 0.5 + (sx as f64 + 0.5) * step;
                let y = py as f64 - 0.5 + (sy as f64 + 0.5) * step;
                ink += inside(x, y) as u32;
            }
        }
        255 - libm::round(255.0 * ink as f64 / (n * n) as f64) as u8
    });
    let mut mask = Vec::with_capacity(img.len());
    for py in 0..h {
        for px in 0..w {
            mask.push(inside(px as f64, py as f64));
        }
    }
    (img, mask)
}
