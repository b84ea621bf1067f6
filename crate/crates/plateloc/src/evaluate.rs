//! Batch evaluation against ground truth.
//!
//! A query counts as recognized when localization succeeded and the selected
//! landmark matches the ground-truth text (or id, when no text is given).
//! Any wrong character makes the whole query unrecognized. Position errors
//! and the CDF use recognized queries only, so a misrecognized query cannot
//! move the mean error.

use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use plateloc_core::{PoseEstimate, PoseFlags};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Relative paths resolve against the manifest's directory.
    pub image_path: PathBuf,
    /// Scripted engine output (box protocol) used instead of a real engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ocr_mock: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    /// Floor-plane position, meters.
    pub world: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmark_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManifestError {
    #[error("entry {0}: empty image path")]
    EmptyPath(usize),
    #[error("entry {0}: ground-truth position is not finite")]
    NonFinitePosition(usize),
}

impl QueryManifest {
    pub fn validate(&self) -> Result<(), ManifestError> {
        for (i, e) in self.entries.iter().enumerate() {
            if e.image_path.as_os_str().is_empty() {
                return Err(ManifestError::EmptyPath(i));
            }
            if let Some(gt) = &e.ground_truth {
                if !gt.world.iter().all(|v| v.is_finite()) {
                    return Err(ManifestError::NonFinitePosition(i));
                }
            }
        }
        Ok(())
    }
}

/// A failed query: machine code plus message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryFailure {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub index: usize,
    pub image_path: PathBuf,
    /// `"ok"` or the failure code.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landmark_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
    /// `None` when the entry has no text or id to judge against.
    pub recognized: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<PoseFlags>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub error_m: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub queries: usize,
    /// Queries with a ground-truth text or id.
    pub judged: usize,
    pub recognized: usize,
    pub recognition_rate: f64,
    pub mean_error_m: Option<f64>,
    pub median_error_m: Option<f64>,
    pub cdf: Vec<CdfPoint>,
    pub records: Vec<QueryRecord>,
}

fn matches_truth(pose: &PoseEstimate, gt: &GroundTruth) -> Option<bool> {
    match (&gt.text, &gt.landmark_id) {
        (Some(t), _) => Some(pose.text == t.trim()),
        (None, Some(id)) => Some(&pose.landmark_id == id),
        (None, None) => None,
    }
}

/// Judges one query.
pub fn record(index: usize, entry: &ManifestEntry, outcome: Result<PoseEstimate, QueryFailure>) -> QueryRecord {
    let mut r = QueryRecord {
        index,
        image_path: entry.image_path.clone(),
        status: "ok".into(),
        message: None,
        text: None,
        landmark_id: None,
        position: None,
        recognized: None,
        error_m: None,
        flags: None,
    };
    let judgeable = entry
        .ground_truth
        .as_ref()
        .is_some_and(|gt| gt.text.is_some() || gt.landmark_id.is_some());
    match outcome {
        Ok(pose) => {
            if let Some(gt) = &entry.ground_truth {
                r.recognized = matches_truth(&pose, gt);
                if r.recognized == Some(true) {
                    r.error_m = Some((pose.world[0] - gt.world[0]).hypot(pose.world[1] - gt.world[1]));
                }
            }
            r.text = Some(pose.text);
            r.landmark_id = Some(pose.landmark_id);
            r.position = Some(pose.world);
            r.flags = Some(pose.flags);
        }
        Err(f) => {
            r.status = f.code;
            r.message = Some(f.message);
            r.recognized = judgeable.then_some(false);
        }
    }
    r
}

/// Empirical CDF of the errors: sorted, ending at 1.0.
pub fn cdf(errors: &[f64]) -> Vec<CdfPoint> {
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, e)| CdfPoint {
            error_m: e,
            fraction: (i + 1) as f64 / n,
        })
        .collect()
}

/// Aggregates records, which may arrive in any order.
pub fn summarize(mut records: Vec<QueryRecord>) -> EvaluationReport {
    records.sort_by_key(|r| r.index);
    let judged = records.iter().filter(|r| r.recognized.is_some()).count();
    let recognized = records.iter().filter(|r| r.recognized == Some(true)).count();
    let errors: Vec<f64> = records.iter().filter_map(|r| r.error_m).collect();
    let cdf = cdf(&errors);
    let mean = (!errors.is_empty()).then(|| errors.iter().sum::<f64>() / errors.len() as f64);
    let median = (!cdf.is_empty()).then(|| {
        let n = cdf.len();
        if n % 2 == 1 {
            cdf[n / 2].error_m
        } else {
            0.5 * (cdf[n / 2 - 1].error_m + cdf[n / 2].error_m)
        }
    });
    EvaluationReport {
        queries: records.len(),
        judged,
        recognized,
        recognition_rate: if judged == 0 { 0.0 } else { recognized as f64 / judged as f64 },
        mean_error_m: mean,
        median_error_m: median,
        cdf,
        records,
    }
}

/// Formats a number with a decimal point and without exponent.
pub fn decimal(x: f64) -> String {
    let s = format!("{x}");
    if x.is_finite() && !s.contains('.') {
        s + ".0"
    } else {
        s
    }
}

/// Writes a numeric table with a header row.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(decimal))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cdf_csv<W: Write>(out: W, cdf: &[CdfPoint]) -> csv::Result<()> {
    write_csv(out, &["error_m", "fraction"], cdf.iter().map(|p| vec![p.error_m, p.fraction]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use plateloc_core::pose::{solve_pose, HorizonX};
    use plateloc_core::Landmark;
    use proptest::prelude::*;

    fn landmark(text: &str) -> Landmark {
        Landmark {
            id: format!("id-{text}"),
            text: text.into(),
            anchor: [0.0, 0.0, 1.5],
            wall_normal: [0.0, 1.0],
            box_width_m: 0.1,
            box_height_m: None,
            centroid_height_m: None,
        }
    }

    fn pose(text: &str, x: f64) -> PoseEstimate {
        let mut p = solve_pose(HorizonX::AtInfinity, 0.05, &landmark(text), false).unwrap();
        p.world = [x, 2.0];
        p
    }

    fn entry(text: &str, world: [f64; 2]) -> ManifestEntry {
        ManifestEntry {
            image_path: format!("{text}.png").into(),
            ocr_mock: None,
            ground_truth: Some(GroundTruth {
                world,
                landmark_id: None,
                text: Some(text.into()),
                theta_deg: None,
                depth_m: None,
            }),
        }
    }

    fn failure(code: &str) -> QueryFailure {
        QueryFailure {
            code: code.into(),
            message: "x".into(),
        }
    }

    #[test]
    fn all_recognized() {
        let recs = (0..10).map(|i| record(i, &entry("4010", [0.0, 2.0]), Ok(pose("4010", 0.0)))).collect();
        let rep = summarize(recs);
        assert_eq!(rep.recognition_rate, 1.0);
        assert_eq!(rep.mean_error_m, Some(0.0));
    }

    #[test]
    fn one_unmapped_of_five() {
        let mut recs: Vec<_> = (0..4).map(|i| record(i, &entry("4010", [0.0, 2.0]), Ok(pose("4010", 0.5)))).collect();
        recs.push(record(4, &entry("4148", [0.0, 2.0]), Err(failure("unknown_landmark"))));
        let rep = summarize(recs);
        assert_eq!(rep.judged, 5);
        assert!((rep.recognition_rate - 0.8).abs() < 1e-15);
        assert_eq!(rep.mean_error_m, Some(0.5));
    }

    #[test]
    fn wrong_text_is_not_recognized() {
        let r = record(0, &entry("4010", [0.0, 2.0]), Ok(pose("4018", 0.0)));
        assert_eq!(r.recognized, Some(false));
        assert_eq!(r.error_m, None);
    }

    #[test]
    fn id_is_used_without_text() {
        let mut e = entry("4010", [0.0, 2.0]);
        let gt = e.ground_truth.as_mut().unwrap();
        gt.text = None;
        gt.landmark_id = Some("id-4010".into());
        assert_eq!(record(0, &e, Ok(pose("4010", 0.0))).recognized, Some(true));
    }

    #[test]
    fn entries_without_truth_are_not_judged() {
        let e = ManifestEntry {
            image_path: "a.png".into(),
            ocr_mock: None,
            ground_truth: None,
        };
        let rep = summarize(vec![record(0, &e, Ok(pose("4010", 0.0)))]);
        assert_eq!(rep.judged, 0);
        assert_eq!(rep.recognition_rate, 0.0);
    }

    #[test]
    fn cdf_csv_is_sorted_and_reaches_one() {
        let c = cdf(&[0.3, 0.1, 0.2]);
        let mut buf = Vec::new();
        write_cdf_csv(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "error_m,fraction\n0.1,0.3333333333333333\n0.2,0.6666666666666666\n0.3,1.0\n");
    }

    #[test]
    fn decimals_always_have_a_point() {
        assert_eq!(decimal(1.0), "1.0");
        assert_eq!(decimal(-3.0), "-3.0");
        assert_eq!(decimal(1e-7), "0.0000001");
        assert_eq!(decimal(0.25), "0.25");
    }

    #[test]
    fn manifest_validation() {
        let mut m = QueryManifest {
            entries: vec![entry("4010", [0.0, 2.0])],
        };
        assert!(m.validate().is_ok());
        m.entries[0].ground_truth.as_mut().unwrap().world[1] = f64::NAN;
        assert_eq!(m.validate(), Err(ManifestError::NonFinitePosition(0)));
        m.entries[0].image_path = PathBuf::new();
        assert_eq!(m.validate(), Err(ManifestError::EmptyPath(0)));
    }

    proptest! {
        #[test]
        fn misrecognized_queries_never_move_the_mean(
            xs in prop::collection::vec(-5.0f64..5.0, 1..12),
            wrong in prop::collection::vec((-50.0f64..50.0, any::<bool>()), 1..6),
        ) {
            let good: Vec<_> = xs.iter().enumerate()
                .map(|(i, &x)| record(i, &entry("4010", [0.0, 2.0]), Ok(pose("4010", x))))
                .collect();
            let base = summarize(good.clone());
            let mut all = good;
            for (j, &(x, failed)) in wrong.iter().enumerate() {
                let outcome = if failed { Err(failure("no_landmark_recognized")) } else { Ok(pose("9999", x)) };
                all.push(record(xs.len() + j, &entry("4010", [0.0, 2.0]), outcome));
            }
            let rep = summarize(all);
            prop_assert_eq!(rep.mean_error_m, base.mean_error_m);
            prop_assert!(rep.recognition_rate <= 1.0 && rep.recognition_rate >= 0.0);
            prop_assert!(rep.cdf.windows(2).all(|w| w[0].error_m <= w[1].error_m && w[0].fraction <= w[1].fraction));
            prop_assert_eq!(rep.cdf.last().unwrap().fraction, 1.0);
        }

        #[test]
        fn summary_ignores_arrival_order(xs in prop::collection::vec(-5.0f64..5.0, 1..10), rot in 0usize..10) {
            let recs: Vec<_> = xs.iter().enumerate()
                .map(|(i, &x)| record(i, &entry("4010", [0.0, 2.0]), Ok(pose("4010", x))))
                .collect();
            let mut shuffled = recs.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            prop_assert_eq!(summarize(recs), summarize(shuffled));
        }
    }
}
