//! Character-candidate regions: maximally stable extremal regions (both
//! polarities) followed by the area/orientation filter, plus global
//! between-class-variance binarization.
//!
//! Extremal regions are built with a union-find sweep over gray levels. Each
//! node of the resulting component tree is a connected component that first
//! appears at `level` and survives unchanged until its parent's level. A node
//! is evaluated at `t = min(level + Δ, parent_level - 1)` with
//!
//! ```text
//! q(t) = (|R(t+Δ)| - |R(t-Δ)|) / |R(t)|
//! ```
//!
//! and kept when `q ≤ stability_ratio` and `q` is a local minimum along the
//! branch (parent and largest child).

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::Point2;
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Dark region on a lighter surround.
    Dark,
    /// Light region on a darker surround.
    Light,
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl PixelRect {
    pub fn width(&self) -> u32 {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> u32 {
        self.y_max - self.y_min + 1
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x_min as f64
            && p.x <= self.x_max as f64
            && p.y >= self.y_min as f64
            && p.y <= self.y_max as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    /// Member pixels, sorted row-major.
    pub pixels: Vec<(u32, u32)>,
    pub area: usize,
    pub centroid: Point2,
    /// Major-axis angle of the second-moment ellipse in `[0, 180)`, measured
    /// from the image x-axis with y pointing down.
    pub orientation_deg: f64,
    /// `(λ1 - λ2) / (λ1 + λ2)` of the second-moment matrix; 0 for isotropic
    /// shapes, approaching 1 for thin ones.
    pub anisotropy: f64,
    pub bbox: PixelRect,
    pub polarity: Polarity,
}

impl Region {
    /// Builds a region and its moments from a pixel list. Returns `None` for
    /// an empty list.
    pub fn from_pixels(mut pixels: Vec<(u32, u32)>, polarity: Polarity) -> Option<Self> {
        if pixels.is_empty() {
            return None;
        }
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        let n = pixels.len() as f64;
        let (mut sx, mut sy) = (0.0, 0.0);
        let mut bbox = PixelRect {
            x_min: u32::MAX,
            y_min: u32::MAX,
            x_max: 0,
            y_max: 0,
        };
        for &(x, y) in &pixels {
            sx += x as f64;
            sy += y as f64;
            bbox.x_min = bbox.x_min.min(x);
            bbox.y_min = bbox.y_min.min(y);
            bbox.x_max = bbox.x_max.max(x);
            bbox.y_max = bbox.y_max.max(y);
        }
        let (cx, cy) = (sx / n, sy / n);
        let (mut m20, mut m02, mut m11) = (0.0, 0.0, 0.0);
        for &(x, y) in &pixels {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            m20 += dx * dx;
            m02 += dy * dy;
            m11 += dx * dy;
        }
        m20 /= n;
        m02 /= n;
        m11 /= n;
        let half_tr = 0.5 * (m20 + m02);
        let disc = libm::hypot(0.5 * (m20 - m02), m11);
        let anisotropy = if half_tr > 0.0 { disc / half_tr } else { 0.0 };
        let mut orientation = libm::atan2(2.0 * m11, m20 - m02).to_degrees() * 0.5;
        if orientation < 0.0 {
            orientation += 180.0;
        }
        if orientation >= 180.0 {
            orientation -= 180.0;
        }
        Some(Self {
            area: pixels.len(),
            pixels,
            centroid: Point2::new(cx, cy),
            orientation_deg: orientation,
            anisotropy,
            bbox,
            polarity,
        })
    }

    /// One-pixel erosion: drops member pixels with a 4-neighbour outside the
    /// region. `None` when nothing survives.
    pub fn eroded(&self) -> Option<Self> {
        let w = (self.bbox.width() + 2) as usize;
        let h = (self.bbox.height() + 2) as usize;
        let mut mask = vec![false; w * h];
        let at = |x: u32, y: u32| (y - self.bbox.y_min + 1) as usize * w + (x - self.bbox.x_min + 1) as usize;
        for &(x, y) in &self.pixels {
            mask[at(x, y)] = true;
        }
        let kept: Vec<(u32, u32)> = self
            .pixels
            .iter()
            .copied()
            .filter(|&(x, y)| {
                let i = at(x, y);
                mask[i - 1] && mask[i + 1] && mask[i - w] && mask[i + w]
            })
            .collect();
        Self::from_pixels(kept, self.polarity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionParams {
    /// Stability window Δ in gray levels.
    pub delta: u8,
    pub stability_ratio: f64,
    pub min_area: usize,
    /// Maximum region area as a fraction of the image.
    pub max_area_frac: f64,
    /// Apply one-pixel erosion to surviving regions after filtering.
    pub refine_boundary: bool,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            delta: 5,
            stability_ratio: 0.25,
            min_area: 30,
            max_area_frac: 0.01,
            refine_boundary: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterParams {
    /// Regions with `area ≥ area_ratio · median` are dropped.
    pub area_ratio: f64,
    /// Regions whose orientation is `eps_deg` or more from vertical are dropped.
    pub eps_deg: f64,
    /// Regions with anisotropy below this skip the orientation test.
    pub isotropy_bypass: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            area_ratio: 10.0,
            eps_deg: 5.0,
            isotropy_bypass: 0.1,
        }
    }
}

struct Node {
    level: u8,
    area: usize,
    parent: Option<usize>,
    children: Vec<usize>,
    own: Vec<u32>,
}

struct ComponentTree {
    nodes: Vec<Node>,
}

const UNSET: u32 = u32::MAX;

fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        let gp = parent[parent[i as usize] as usize];
        parent[i as usize] = gp;
        i = gp;
    }
    i
}

impl ComponentTree {
    /// Sweeps gray levels upward; components are dark-first.
    fn build(img: &GrayImage) -> Self {
        let w = img.width() as usize;
        let h = img.height() as usize;
        let n = w * h;
        let px = img.pixels();

        // counting sort keeps pixel order stable within a level
        let mut counts = [0usize; 257];
        for &v in px {
            counts[v as usize + 1] += 1;
        }
        for i in 1..257 {
            counts[i] += counts[i - 1];
        }
        let starts = counts;
        let mut order = vec![0u32; n];
        let mut fill = counts;
        for (i, &v) in px.iter().enumerate() {
            order[fill[v as usize]] = i as u32;
            fill[v as usize] += 1;
        }

        let mut parent = vec![UNSET; n];
        let mut rank = vec![0u8; n];
        let mut area = vec![0usize; n];
        let mut cur_node: Vec<Option<usize>> = vec![None; n];
        let mut pending: Vec<Vec<usize>> = Vec::new();
        pending.resize_with(n, Vec::new);
        let mut fresh: Vec<Vec<u32>> = Vec::new();
        fresh.resize_with(n, Vec::new);
        let mut stamp = vec![u16::MAX; n];
        let mut nodes: Vec<Node> = Vec::new();
        let mut touched: Vec<u32> = Vec::new();

        for level in 0..=255u16 {
            touched.clear();
            let range = starts[level as usize]..starts[level as usize + 1];
            for &p in &order[range] {
                parent[p as usize] = p;
                area[p as usize] = 1;
                stamp[p as usize] = level;
                fresh[p as usize].push(p);
                touched.push(p);
                let (x, y) = (p as usize % w, p as usize / w);
                let mut neighbours = [UNSET; 4];
                if x > 0 {
                    neighbours[0] = p - 1;
                }
                if x + 1 < w {
                    neighbours[1] = p + 1;
                }
                if y > 0 {
                    neighbours[2] = p - w as u32;
                }
                if y + 1 < h {
                    neighbours[3] = p + w as u32;
                }
                for q in neighbours {
                    if q == UNSET || parent[q as usize] == UNSET {
                        continue;
                    }
                    let a = find(&mut parent, p);
                    let b = find(&mut parent, q);
                    if a == b {
                        continue;
                    }
                    for r in [a, b] {
                        let r = r as usize;
                        if stamp[r] != level {
                            stamp[r] = level;
                            if let Some(nd) = cur_node[r].take() {
                                pending[r].push(nd);
                            }
                        }
                    }
                    let (root, child) = if rank[a as usize] >= rank[b as usize] {
                        (a as usize, b as usize)
                    } else {
                        (b as usize, a as usize)
                    };
                    if rank[root] == rank[child] {
                        rank[root] += 1;
                    }
                    parent[child] = root as u32;
                    area[root] += area[child];
                    let moved = core::mem::take(&mut pending[child]);
                    pending[root].extend(moved);
                    let moved = core::mem::take(&mut fresh[child]);
                    fresh[root].extend(moved);
                    touched.push(root as u32);
                }
            }
            // one new node per component touched at this level
            for i in 0..touched.len() {
                let r = find(&mut parent, touched[i]) as usize;
                if stamp[r] == level + 256 {
                    continue;
                }
                stamp[r] = level + 256;
                let children = core::mem::take(&mut pending[r]);
                let id = nodes.len();
                for &c in &children {
                    nodes[c].parent = Some(id);
                }
                nodes.push(Node {
                    level: level as u8,
                    area: area[r],
                    parent: None,
                    children,
                    own: core::mem::take(&mut fresh[r]),
                });
                cur_node[r] = Some(id);
            }
            // stamps of level+256 must not collide with the next level's
            // "already touched" test
            for &t in &touched {
                let r = find(&mut parent, t) as usize;
                stamp[r] = u16::MAX;
            }
        }
        Self { nodes }
    }

    fn largest_child(&self, n: usize) -> Option<usize> {
        self.nodes[n]
            .children
            .iter()
            .copied()
            .max_by_key(|&c| (self.nodes[c].area, core::cmp::Reverse(c)))
    }

    /// Area of the region on this branch at threshold `t`.
    fn area_at(&self, n: usize, t: i32) -> usize {
        let mut cur = n;
        if t >= self.nodes[n].level as i32 {
            while let Some(p) = self.nodes[cur].parent {
                if self.nodes[p].level as i32 <= t {
                    cur = p;
                } else {
                    break;
                }
            }
            self.nodes[cur].area
        } else {
            loop {
                if (self.nodes[cur].level as i32) <= t {
                    return self.nodes[cur].area;
                }
                match self.largest_child(cur) {
                    Some(c) => cur = c,
                    None => return 0,
                }
            }
        }
    }

    fn variation(&self, n: usize, delta: i32) -> f64 {
        let node = &self.nodes[n];
        let lvl = node.level as i32;
        let end = node.parent.map_or(255, |p| self.nodes[p].level as i32 - 1);
        let t = (lvl + delta).min(end).max(lvl);
        let up = self.area_at(n, t + delta);
        let down = self.area_at(n, t - delta);
        (up - down) as f64 / node.area as f64
    }

    fn pixels(&self, n: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.nodes[n].area);
        let mut stack = vec![n];
        while let Some(c) = stack.pop() {
            out.extend_from_slice(&self.nodes[c].own);
            stack.extend_from_slice(&self.nodes[c].children);
        }
        out
    }
}

fn stable_regions(img: &GrayImage, params: &RegionParams, polarity: Polarity) -> Vec<Region> {
    let tree = ComponentTree::build(img);
    let delta = params.delta as i32;
    let max_area = (params.max_area_frac * img.len() as f64) as usize;
    let q: Vec<f64> = (0..tree.nodes.len()).map(|n| tree.variation(n, delta)).collect();
    let w = img.width();
    let mut out = Vec::new();
    for (n, node) in tree.nodes.iter().enumerate() {
        if node.area < params.min_area || node.area > max_area {
            continue;
        }
        if q[n] > params.stability_ratio {
            continue;
        }
        if let Some(p) = node.parent {
            if q[p] < q[n] || (q[p] == q[n] && tree.nodes[p].area <= max_area) {
                continue;
            }
        }
        if let Some(c) = tree.largest_child(n) {
            if q[c] < q[n] && tree.nodes[c].area >= params.min_area {
                continue;
            }
        }
        let pixels = tree
            .pixels(n)
            .into_iter()
            .map(|i| (i % w, i / w))
            .collect();
        if let Some(r) = Region::from_pixels(pixels, polarity) {
            out.push(r);
        }
    }
    out
}

/// Maximally stable extremal regions of both polarities. Dark regions come
/// first, each group in component-tree order.
pub fn detect_regions(img: &GrayImage, params: &RegionParams) -> Vec<Region> {
    let mut regions = stable_regions(img, params, Polarity::Dark);
    regions.extend(stable_regions(&img.inverted(), params, Polarity::Light));
    regions
}

fn median(values: &mut [usize]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        0.5 * (values[n / 2 - 1] as f64 + values[n / 2] as f64)
    }
}

/// Single-pass area and orientation filter; the median is taken over the
/// whole input list.
pub fn geometric_filter(regions: &[Region], params: &FilterParams) -> Vec<Region> {
    if regions.is_empty() {
        return Vec::new();
    }
    let mut areas: Vec<usize> = regions.iter().map(|r| r.area).collect();
    let med = median(&mut areas);
    regions
        .iter()
        .filter(|r| (r.area as f64) < params.area_ratio * med)
        .filter(|r| {
            r.anisotropy < params.isotropy_bypass || (r.orientation_deg - 90.0).abs() < params.eps_deg
        })
        .cloned()
        .collect()
}

/// Otsu threshold: pixels `<= t` form the dark class. `None` when the image
/// holds a single intensity.
pub fn otsu_threshold(img: &GrayImage) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &v in img.pixels() {
        hist[v as usize] += 1;
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let total = img.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best = (f64::NEG_INFINITY, 0u8);
    for t in 0..255usize {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best.0 {
            best = (between, t as u8);
        }
    }
    Some(best.1)
}

/// Global binarization to `{0, 255}`, normalized so that the minority
/// (text) class is dark on a light background.
pub fn binarize(img: &GrayImage) -> GrayImage {
    let Some(t) = otsu_threshold(img) else {
        return GrayImage::filled(img.width(), img.height(), 255);
    };
    let dark = img.pixels().iter().filter(|&&v| v <= t).count();
    let flip = dark * 2 > img.len();
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| if (v <= t) != flip { 0 } else { 255 })
        .collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("same dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn region_with(area: usize, orientation_deg: f64, anisotropy: f64) -> Region {
        Region {
            pixels: Vec::new(),
            area,
            centroid: Point2::default(),
            orientation_deg,
            anisotropy,
            bbox: PixelRect {
                x_min: 0,
                y_min: 0,
                x_max: 0,
                y_max: 0,
            },
            polarity: Polarity::Dark,
        }
    }

    fn rect_image(w: u32, h: u32, rect: PixelRect, fg: u8, bg: u8) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            if rect.contains(Point2::new(x as f64, y as f64)) {
                fg
            } else {
                bg
            }
        })
    }

    #[test]
    fn uniform_image_has_no_regions() {
        let img = GrayImage::filled(120, 80, 128);
        assert!(detect_regions(&img, &RegionParams::default()).is_empty());
    }

    #[test]
    fn single_black_rectangle() {
        let rect = PixelRect {
            x_min: 100,
            y_min: 50,
            x_max: 119,
            y_max: 89,
        };
        let img = rect_image(400, 300, rect, 0, 255);
        let regions = detect_regions(&img, &RegionParams::default());
        assert_eq!(regions.len(), 1, "{regions:?}");
        let r = &regions[0];
        assert_eq!(r.polarity, Polarity::Dark);
        assert!((r.area as f64 - 800.0).abs() <= 40.0);
        assert!(r.bbox.x_min.abs_diff(100) <= 1 && r.bbox.x_max.abs_diff(119) <= 1);
        assert!(r.bbox.y_min.abs_diff(50) <= 1 && r.bbox.y_max.abs_diff(89) <= 1);
        assert!((r.orientation_deg - 90.0).abs() < 1e-9);
        assert!(r.bbox.contains(r.centroid));

        let inv = detect_regions(&img.inverted(), &RegionParams::default());
        assert_eq!(inv.len(), 1);
        assert_eq!(inv[0].polarity, Polarity::Light);
        assert_eq!(inv[0].pixels, r.pixels);
    }

    #[test]
    fn blurred_edges_still_yield_one_stable_region() {
        let rect = PixelRect {
            x_min: 60,
            y_min: 40,
            x_max: 79,
            y_max: 79,
        };
        let sharp = rect_image(400, 300, rect, 20, 230);
        // 3x3 box blur produces intermediate levels around the boundary
        let blurred = GrayImage::from_fn(400, 300, |x, y| {
            let mut s = 0u32;
            let mut n = 0u32;
            for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    let (xx, yy) = (x as i32 + dx, y as i32 + dy);
                    if (0..400).contains(&xx) && (0..300).contains(&yy) {
                        s += sharp.get(xx as u32, yy as u32) as u32;
                        n += 1;
                    }
                }
            }
            (s / n) as u8
        });
        let dark: Vec<_> = detect_regions(&blurred, &RegionParams::default())
            .into_iter()
            .filter(|r| r.polarity == Polarity::Dark)
            .collect();
        assert!(!dark.is_empty());
        assert!(dark.iter().all(|r| (r.area as f64 - 800.0).abs() < 160.0));
    }

    #[test]
    fn detection_is_deterministic() {
        let img = GrayImage::from_fn(64, 64, |x, y| ((x * 7 + y * 13) % 256) as u8 / 4 * 4);
        let p = RegionParams {
            max_area_frac: 0.5,
            ..Default::default()
        };
        assert_eq!(detect_regions(&img, &p), detect_regions(&img, &p));
    }

    #[test]
    fn filter_drops_large_regions() {
        let regions: Vec<Region> = [10, 10, 10, 10, 500]
            .iter()
            .map(|&a| region_with(a, 90.0, 0.5))
            .collect();
        let kept = geometric_filter(&regions, &FilterParams::default());
        assert_eq!(kept.len(), 4);
        assert!(kept.iter().all(|r| r.area == 10));
    }

    #[test]
    fn filter_boundaries_are_strict() {
        let p = FilterParams::default();
        // area exactly N·median is removed; median of [10, 10, 100] is 10
        let regions = [region_with(10, 90.0, 0.5), region_with(10, 90.0, 0.5), region_with(100, 90.0, 0.5)];
        assert_eq!(geometric_filter(&regions, &p).len(), 2);
        // even-length median is the mean of the middle pair: 10, 10, [10, 20], 149, 150 -> 15
        let regions: Vec<Region> = [10, 10, 10, 20, 149, 150].iter().map(|&a| region_with(a, 90.0, 0.5)).collect();
        let kept = geometric_filter(&regions, &p);
        assert_eq!(kept.iter().map(|r| r.area).collect::<Vec<_>>(), vec![10, 10, 10, 20, 149]);
        // orientation exactly 5° away is removed, 4.999° is kept
        assert!(geometric_filter(&[region_with(10, 85.0, 0.5)], &p).is_empty());
        assert_eq!(geometric_filter(&[region_with(10, 94.999, 0.5)], &p).len(), 1);
        assert!(geometric_filter(&[region_with(10, 80.0, 0.5)], &p).is_empty());
        assert!(geometric_filter(&[], &p).is_empty());
    }

    #[test]
    fn isotropic_regions_bypass_orientation() {
        let p = FilterParams::default();
        assert_eq!(geometric_filter(&[region_with(10, 10.0, 0.05)], &p).len(), 1);
        assert!(geometric_filter(&[region_with(10, 10.0, 0.2)], &p).is_empty());
    }

    #[test]
    fn filter_is_one_pass_over_original_median() {
        // second pass sees a smaller median and drops more
        let regions: Vec<Region> = [1, 1, 1, 9, 9, 9, 9]
            .iter()
            .map(|&a| region_with(a, 90.0, 0.5))
            .collect();
        let p = FilterParams {
            area_ratio: 2.0,
            ..Default::default()
        };
        let once = geometric_filter(&regions, &p);
        assert_eq!(once.len(), 7);
        let twice = geometric_filter(&regions[..3], &p);
        assert_eq!(twice.len(), 3);
    }

    #[test]
    fn erosion_shrinks_rectangle() {
        let pixels: Vec<(u32, u32)> = (0..5).flat_map(|y| (0..4).map(move |x| (x + 10, y + 10))).collect();
        let r = Region::from_pixels(pixels, Polarity::Dark).unwrap();
        let e = r.eroded().unwrap();
        assert_eq!(e.area, 2 * 3);
        assert_eq!(e.bbox.x_min, 11);
    }

    #[test]
    fn binarize_bimodal() {
        let img = GrayImage::from_fn(40, 20, |x, _| if x < 20 { 10 } else { 240 });
        let b = binarize(&img);
        for y in 0..20 {
            for x in 0..40 {
                assert_eq!(b.get(x, y), if x < 20 { 0 } else { 255 });
            }
        }
    }

    #[test]
    fn binarize_uniform_is_background() {
        let b = binarize(&GrayImage::filled(8, 8, 77));
        assert!(b.pixels().iter().all(|&v| v == 255));
    }

    #[test]
    fn binarize_flips_majority_dark() {
        let img = GrayImage::from_fn(10, 10, |x, _| if x < 8 { 20 } else { 220 });
        let b = binarize(&img);
        assert_eq!(b.get(0, 0), 255);
        assert_eq!(b.get(9, 0), 0);
    }

    proptest! {
        #[test]
        fn filter_is_monotone(
            specs in prop::collection::vec((1usize..500, 0.0f64..180.0, 0.0f64..1.0), 0..30),
            n in 1.0f64..20.0, eps in 0.5f64..20.0, shrink in 0.1f64..1.0,
        ) {
            let regions: Vec<Region> = specs.iter().map(|&(a, o, e)| region_with(a, o, e)).collect();
            let base = FilterParams { area_ratio: n, eps_deg: eps, ..Default::default() };
            let kept = geometric_filter(&regions, &base).len();
            let tighter_eps = geometric_filter(&regions, &FilterParams { eps_deg: eps * shrink, ..base }).len();
            let tighter_n = geometric_filter(&regions, &FilterParams { area_ratio: n * shrink, ..base }).len();
            prop_assert!(tighter_eps <= kept);
            prop_assert!(tighter_n <= kept);
        }

        #[test]
        fn region_moments_invariants(pts in prop::collection::btree_set((0u32..30, 0u32..30), 1..80)) {
            let r = Region::from_pixels(pts.iter().copied().collect(), Polarity::Dark).unwrap();
            prop_assert_eq!(r.area, pts.len());
            prop_assert!(r.bbox.contains(r.centroid));
            prop_assert!((0.0..180.0).contains(&r.orientation_deg));
        }
    }
}
