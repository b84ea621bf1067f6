//! OCR stage: masking regions for the engine, the engine abstraction and its
//! line protocol, and choosing which recognized landmark drives localization.
//!
//! Engines speak a tab-separated protocol, one recognized box per line:
//!
//! ```text
//! text<TAB>x_min<TAB>y_min<TAB>width<TAB>height<TAB>confidence
//! ```
//!
//! Coordinates are pixels in the image handed to the engine, confidence is in
//! `[0, 1]`. Blank lines are ignored.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::detect::{binarize, Region};
use crate::floorplan::{FloorPlan, Landmark};
use crate::image::GrayImage;

/// An axis-aligned box around a recognized character string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrBox {
    pub text: String,
    pub x_min: f64,
    pub y_min: f64,
    pub width: f64,
    pub height: f64,
    pub confidence: f64,
}

impl OcrBox {
    /// Checks the box invariants against an image of the given size.
    pub fn check(&self, img_width: u32, img_height: u32) -> Result<(), String> {
        if self.text.trim().is_empty() {
            return Err("empty text".into());
        }
        let vals = [self.x_min, self.y_min, self.width, self.height, self.confidence];
        if !vals.iter().all(|v| v.is_finite()) {
            return Err("non-finite number".into());
        }
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(format!("non-positive size {}x{}", self.width, self.height));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(format!("confidence {} outside [0, 1]", self.confidence));
        }
        const SLACK: f64 = 1e-9;
        if self.x_min < -SLACK
            || self.y_min < -SLACK
            || self.x_min + self.width > img_width as f64 + SLACK
            || self.y_min + self.height > img_height as f64 + SLACK
        {
            return Err(format!(
                "box ({}, {}, {}, {}) outside {}x{} image",
                self.x_min, self.y_min, self.width, self.height, img_width, img_height
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineFailure {
    #[error("engine exited with status {code:?}: {stderr}")]
    NonZeroExit { code: Option<i32>, stderr: String },
    #[error("protocol violation on line {line}: {reason}")]
    Protocol { line: usize, reason: String },
    #[error("engine timed out after {seconds} s")]
    Timeout { seconds: f64 },
    #[error("engine i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OcrError {
    #[error("OCR engine failure: {0}")]
    EngineFailure(#[from] EngineFailure),
    #[error("no recognized text matches a floor-plan landmark")]
    NoLandmarkRecognized,
}

/// Anything that turns a preprocessed image into recognized boxes.
pub trait OcrEngine {
    fn recognize(&self, img: &GrayImage) -> Result<Vec<OcrBox>, EngineFailure>;
}

impl<E: OcrEngine + ?Sized> OcrEngine for &E {
    fn recognize(&self, img: &GrayImage) -> Result<Vec<OcrBox>, EngineFailure> {
        (**self).recognize(img)
    }
}

/// Deterministic engine that returns a fixed script of boxes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MockEngine {
    boxes: Vec<OcrBox>,
}

impl MockEngine {
    pub fn new(boxes: Vec<OcrBox>) -> Self {
        Self { boxes }
    }

    /// Scripts the engine from protocol text.
    pub fn from_protocol(output: &str) -> Result<Self, EngineFailure> {
        parse_engine_output(output).map(Self::new)
    }

    pub fn boxes(&self) -> &[OcrBox] {
        &self.boxes
    }
}

impl OcrEngine for MockEngine {
    fn recognize(&self, _img: &GrayImage) -> Result<Vec<OcrBox>, EngineFailure> {
        Ok(self.boxes.clone())
    }
}

/// Parses engine standard output into boxes. Only syntax is checked here;
/// [`recognize`] checks geometry against the image.
pub fn parse_engine_output(output: &str) -> Result<Vec<OcrBox>, EngineFailure> {
    let mut out = Vec::new();
    for (i, raw) in output.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let violation = |reason: String| EngineFailure::Protocol { line: i + 1, reason };
        if fields.len() != 6 {
            return Err(violation(format!("expected 6 tab-separated fields, found {}", fields.len())));
        }
        let mut nums = [0.0f64; 5];
        for (slot, field) in nums.iter_mut().zip(&fields[1..]) {
            *slot = field
                .trim()
                .parse::<f64>()
                .map_err(|_| violation(format!("not a number: {field:?}")))?;
        }
        out.push(OcrBox {
            text: fields[0].to_string(),
            x_min: nums[0],
            y_min: nums[1],
            width: nums[2],
            height: nums[3],
            confidence: nums[4],
        });
    }
    Ok(out)
}

/// Renders boxes in the engine protocol.
pub fn format_engine_output(boxes: &[OcrBox]) -> String {
    let mut s = String::new();
    for b in boxes {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            b.text, b.x_min, b.y_min, b.width, b.height, b.confidence
        ));
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OcrParams {
    pub min_area: usize,
    /// Largest region handed to the engine, as a fraction of the image.
    pub max_area_frac: f64,
    pub min_confidence: f64,
}

impl Default for OcrParams {
    fn default() -> Self {
        Self {
            min_area: 50,
            max_area_frac: 0.05,
            min_confidence: 0.5,
        }
    }
}

/// Binarizes the image and keeps only pixels that belong to regions inside
/// the area window; everything else becomes background (255).
pub fn preprocess_for_ocr(img: &GrayImage, regions: &[Region], params: &OcrParams) -> GrayImage {
    let bin = binarize(img);
    let max_area = params.max_area_frac * img.len() as f64;
    let mut out = GrayImage::filled(img.width(), img.height(), 255);
    for r in regions
        .iter()
        .filter(|r| r.area >= params.min_area && (r.area as f64) <= max_area)
    {
        for &(x, y) in &r.pixels {
            out.set(x, y, bin.get(x, y));
        }
    }
    out
}

/// Runs the engine, validates every box and drops low-confidence ones.
pub fn recognize<E: OcrEngine + ?Sized>(
    engine: &E,
    img: &GrayImage,
    params: &OcrParams,
) -> Result<Vec<OcrBox>, OcrError> {
    let boxes = engine.recognize(img)?;
    for (i, b) in boxes.iter().enumerate() {
        b.check(img.width(), img.height())
            .map_err(|reason| EngineFailure::Protocol { line: i + 1, reason })?;
    }
    Ok(boxes
        .into_iter()
        .filter(|b| b.confidence >= params.min_confidence)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection<'a> {
    pub landmark: &'a Landmark,
    pub ocr_box: OcrBox,
    /// Number of distinct floor-plan landmarks among the boxes.
    pub distinct_landmarks: usize,
}

/// Picks the widest box whose text is a floor-plan landmark; ties go to the
/// higher confidence, then the leftmost box.
pub fn select_landmark<'a>(boxes: &[OcrBox], plan: &'a FloorPlan) -> Result<Selection<'a>, OcrError> {
    let mut matched: Vec<(&OcrBox, &Landmark)> = boxes
        .iter()
        .filter_map(|b| plan.lookup(&b.text).ok().map(|lm| (b, lm)))
        .collect();
    let mut ids: Vec<&str> = matched.iter().map(|(_, lm)| lm.id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    let distinct = ids.len();
    matched.sort_by(|(a, _), (b, _)| {
        b.width
            .partial_cmp(&a.width)
            .unwrap_or(Ordering::Equal)
            .then(b.confidence.partial_cmp(&a.confidence).unwrap_or(Ordering::Equal))
            .then(a.x_min.partial_cmp(&b.x_min).unwrap_or(Ordering::Equal))
    });
    let (b, lm) = matched.first().ok_or(OcrError::NoLandmarkRecognized)?;
    Ok(Selection {
        landmark: lm,
        ocr_box: (*b).clone(),
        distinct_landmarks: distinct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::Polarity;
    use alloc::vec;
    use proptest::prelude::*;

    fn bx(text: &str, x: f64, w: f64, conf: f64) -> OcrBox {
        OcrBox {
            text: text.into(),
            x_min: x,
            y_min: 10.0,
            width: w,
            height: 20.0,
            confidence: conf,
        }
    }

    fn plan(texts: &[&str]) -> FloorPlan {
        FloorPlan {
            name: "p".into(),
            units: "meters".into(),
            landmarks: texts
                .iter()
                .enumerate()
                .map(|(i, t)| Landmark {
                    id: format!("lm{i}"),
                    text: (*t).into(),
                    anchor: [i as f64, 0.0, 1.5],
                    wall_normal: [0.0, 1.0],
                    box_width_m: 0.1,
                    box_height_m: None,
                    centroid_height_m: None,
                })
                .collect(),
        }
    }

    #[test]
    fn mock_returns_script() {
        let m = MockEngine::new(vec![bx("4010", 5.0, 40.0, 0.9)]);
        let img = GrayImage::filled(100, 100, 255);
        let got = recognize(&m, &img, &OcrParams::default()).unwrap();
        assert_eq!(got, vec![bx("4010", 5.0, 40.0, 0.9)]);
    }

    #[test]
    fn low_confidence_dropped() {
        let m = MockEngine::new(vec![bx("4010", 5.0, 40.0, 0.49), bx("4148", 5.0, 40.0, 0.5)]);
        let img = GrayImage::filled(100, 100, 255);
        let got = recognize(&m, &img, &OcrParams::default()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].text, "4148");
    }

    #[test]
    fn out_of_bounds_box_is_engine_failure() {
        let m = MockEngine::new(vec![bx("4010", 80.0, 40.0, 0.9)]);
        let img = GrayImage::filled(100, 100, 255);
        assert!(matches!(
            recognize(&m, &img, &OcrParams::default()),
            Err(OcrError::EngineFailure(EngineFailure::Protocol { .. }))
        ));
    }

    #[test]
    fn protocol_parsing() {
        let out = "4010\t12\t30.5\t80\t24\t0.93\n\nEXIT\t1\t2\t3\t4\t1\r\n";
        let boxes = parse_engine_output(out).unwrap();
        assert_eq!(boxes.len(), 2);
        assert_eq!(boxes[0].y_min, 30.5);
        assert_eq!(boxes[1].text, "EXIT");
        assert_eq!(parse_engine_output(&format_engine_output(&boxes)).unwrap(), boxes);
    }

    #[test]
    fn malformed_protocol_lines() {
        assert!(matches!(
            parse_engine_output("4010 12 30 80 24 0.9"),
            Err(EngineFailure::Protocol { line: 1, .. })
        ));
        assert!(matches!(
            parse_engine_output("ok\t1\t1\t1\t1\t1\n4010\t1,5\t1\t1\t1\t1"),
            Err(EngineFailure::Protocol { line: 2, .. })
        ));
    }

    #[test]
    fn selection_ignores_unmapped_text() {
        let p = plan(&["4010"]);
        let s = select_landmark(&[bx("4010", 0.0, 80.0, 0.9), bx("EXIT", 0.0, 120.0, 0.9)], &p).unwrap();
        assert_eq!(s.landmark.text, "4010");
        assert_eq!(s.distinct_landmarks, 1);
    }

    #[test]
    fn selection_prefers_widest() {
        let p = plan(&["4010", "4148"]);
        let s = select_landmark(&[bx("4010", 0.0, 40.0, 0.9), bx("4148", 0.0, 90.0, 0.9)], &p).unwrap();
        assert_eq!(s.landmark.text, "4148");
        assert_eq!(s.distinct_landmarks, 2);
    }

    #[test]
    fn selection_tie_breaks() {
        let p = plan(&["4010", "4148"]);
        let s = select_landmark(&[bx("4010", 0.0, 50.0, 0.7), bx("4148", 9.0, 50.0, 0.8)], &p).unwrap();
        assert_eq!(s.landmark.text, "4148");
        let s = select_landmark(&[bx("4010", 30.0, 50.0, 0.8), bx("4148", 9.0, 50.0, 0.8)], &p).unwrap();
        assert_eq!(s.landmark.text, "4148");
    }

    #[test]
    fn selection_without_landmark() {
        assert_eq!(
            select_landmark(&[bx("EXIT", 0.0, 10.0, 1.0)], &plan(&["4010"])),
            Err(OcrError::NoLandmarkRecognized)
        );
    }

    fn square_region(x0: u32, y0: u32, side: u32) -> Region {
        let px = (y0..y0 + side).flat_map(|y| (x0..x0 + side).map(move |x| (x, y))).collect();
        Region::from_pixels(px, Polarity::Dark).unwrap()
    }

    #[test]
    fn preprocess_with_no_regions_is_blank() {
        let img = GrayImage::from_fn(50, 50, |x, _| if x < 10 { 0 } else { 255 });
        let out = preprocess_for_ocr(&img, &[], &OcrParams::default());
        assert!(out.pixels().iter().all(|&v| v == 255));
    }

    #[test]
    fn preprocess_keeps_exactly_the_glyph() {
        // dark 10x10 glyph at (20, 20), plus a dark blob elsewhere that is not a region
        let img = GrayImage::from_fn(60, 60, |x, y| {
            if (20..30).contains(&x) && (20..30).contains(&y) || (x < 5 && y < 5) {
                10
            } else {
                230
            }
        });
        let glyph = square_region(20, 20, 10);
        let out = preprocess_for_ocr(&img, &[glyph.clone()], &OcrParams::default());
        for y in 0..60 {
            for x in 0..60 {
                let inside = glyph.pixels.contains(&(x, y));
                assert_eq!(out.get(x, y), if inside { 0 } else { 255 }, "({x},{y})");
            }
        }
    }

    #[test]
    fn preprocess_drops_small_regions() {
        let img = GrayImage::from_fn(60, 60, |x, y| {
            if (y == 0 && x < 10) || ((30..38).contains(&x) && (30..38).contains(&y)) {
                0
            } else {
                255
            }
        });
        let small = Region::from_pixels((0..10).map(|x| (x, 0)).collect(), Polarity::Dark).unwrap();
        let big = square_region(30, 30, 8);
        let out = preprocess_for_ocr(&img, &[small, big], &OcrParams::default());
        let dark: usize = out.pixels().iter().filter(|&&v| v == 0).count();
        assert_eq!(out.get(0, 0), 255);
        assert_eq!(dark, 64);
    }

    proptest! {
        #[test]
        fn selection_text_is_in_plan(
            plan_texts in prop::collection::btree_set("[0-9]{3}", 1..5),
            boxes in prop::collection::vec(("[0-9]{3}", 1.0f64..200.0, 0.0f64..1.0), 0..8),
        ) {
            let texts: Vec<&str> = plan_texts.iter().map(|s| s.as_str()).collect();
            let p = plan(&texts);
            let boxes: Vec<OcrBox> = boxes.iter().map(|(t, w, c)| bx(t, 0.0, *w, *c)).collect();
            match select_landmark(&boxes, &p) {
                Ok(s) => {
                    prop_assert!(p.contains_text(&s.landmark.text));
                    prop_assert_eq!(&s.ocr_box.text, &s.landmark.text);
                }
                Err(_) => prop_assert!(boxes.iter().all(|b| !p.contains_text(&b.text))),
            }
        }

        #[test]
        fn recognize_respects_min_confidence(confs in prop::collection::vec(0.0f64..=1.0, 0..10), min in 0.0f64..=1.0) {
            let m = MockEngine::new(confs.iter().map(|&c| bx("1", 0.0, 5.0, c)).collect());
            let params = OcrParams { min_confidence: min, ..Default::default() };
            let got = recognize(&m, &GrayImage::filled(20, 40, 0), &params).unwrap();
            prop_assert!(got.iter().all(|b| b.confidence >= min));
        }

        #[test]
        fn preprocess_background_outside_masks(seed in 0u32..1000, x0 in 0u32..40, y0 in 0u32..40) {
            let img = GrayImage::from_fn(50, 50, |x, y| ((x * 31 + y * 17 + seed) % 256) as u8);
            let r = square_region(x0, y0, 9);
            let out = preprocess_for_ocr(&img, &[r.clone()], &OcrParams::default());
            for y in 0..50 {
                for x in 0..50 {
                    if !r.pixels.contains(&(x, y)) {
                        prop_assert_eq!(out.get(x, y), 255);
                    }
                }
            }
        }
    }
}
