//! End-to-end runs of the `plateloc` binary on synthetic scenes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn plateloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plateloc")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scene(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec!["synth-scene", "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = plateloc(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn localize(sc: &Path, extra: &[&str]) -> Output {
    let image = sc.join("scene.png");
    let calib = sc.join("calib.json");
    let plan = sc.join("floorplan.json");
    let mut args = vec!["localize", "--image", s(&image), "--calib", s(&calib), "--floorplan", s(&plan)];
    args.extend_from_slice(extra);
    plateloc(&args)
}

fn truth(sc: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(sc.join("truth.json")).unwrap()).unwrap()
}

fn position_error(out: &Value, truth: &Value) -> f64 {
    let p = &out["pose"]["world"];
    let t = &truth["world"];
    (p[0].as_f64().unwrap() - t[0].as_f64().unwrap()).hypot(p[1].as_f64().unwrap() - t[1].as_f64().unwrap())
}

#[test]
fn localize_rendered_scene() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scene(dir.path(), "a", &["--depth", "2", "--theta-deg", "-20"]);
    let mock = sc.join("ocr.tsv");
    let o = localize(&sc, &["--ocr-mock", s(&mock)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let v = stdout_json(&o);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["pose"]["text"], "4010");
    assert!(position_error(&v, &truth(&sc)) < 0.1);
    assert_eq!(v["config"]["seed"], 0);
    assert_eq!(v["config"]["pipeline"]["ransac"]["iterations"], 500);
}

#[test]
fn seed_and_overrides_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scene(dir.path(), "a", &["--theta-deg", "15"]);
    let mock = sc.join("ocr.tsv");
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"pipeline": {"ransac": {"iterations": 300}}}"#).unwrap();
    let o = localize(
        &sc,
        &["--ocr-mock", s(&mock), "--config", s(&cfg), "--seed", "7", "--set", "pipeline.refine=false"],
    );
    let v = stdout_json(&o);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["pipeline"]["ransac"]["seed"], 7);
    assert_eq!(v["config"]["pipeline"]["ransac"]["iterations"], 300);
    assert_eq!(v["config"]["pipeline"]["refine"], false);
    assert_eq!(v["pose"]["flags"]["refined"], false);
}

#[test]
fn unmapped_plate_exits_with_unknown_landmark() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scene(dir.path(), "a", &["--text", "EXIT", "--theta-deg", "10"]);
    let plan = json!({"name": "p", "units": "meters", "landmarks": [
        {"id": "r", "text": "4010", "anchor": [0, 0, 1.5], "wall_normal": [0, 1], "box_width_m": 0.1}
    ]});
    fs::write(sc.join("floorplan.json"), plan.to_string()).unwrap();
    let mock = sc.join("ocr.tsv");
    let o = localize(&sc, &["--ocr-mock", s(&mock)]);
    assert_eq!(o.status.code(), Some(4));
    let v = stdout_json(&o);
    assert_eq!(v["status"], "error");
    assert_eq!(v["error"]["code"], "unknown_landmark");
    assert_eq!(v["error"]["details"]["texts"], json!(["EXIT"]));
    assert!(v["config"].is_object());
}

#[test]
fn blank_image_exits_with_no_landmark() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scene(dir.path(), "a", &[]);
    image::GrayImage::from_pixel(320, 240, image::Luma([200])).save(sc.join("scene.png")).unwrap();
    let empty = sc.join("empty.tsv");
    fs::write(&empty, "").unwrap();
    let o = localize(&sc, &["--ocr-mock", s(&empty)]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout_json(&o)["error"]["code"], "no_landmark_recognized");
}

#[test]
fn missing_engine_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scene(dir.path(), "a", &[]);
    let o = localize(&sc, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout_json(&o)["error"]["code"], "usage");
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scene(dir.path(), "a", &[]);
    fs::remove_file(sc.join("calib.json")).unwrap();
    let mock = sc.join("ocr.tsv");
    let o = localize(&sc, &["--ocr-mock", s(&mock)]);
    assert_eq!(o.status.code(), Some(1));
}

#[cfg(unix)]
#[test]
fn external_engine_process() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    let sc = scene(dir.path(), "a", &["--depth", "1.8", "--theta-deg", "25"]);
    let script = dir.path().join("engine.sh");
    fs::write(&script, format!("#!/bin/sh\ntest -s \"$1\" || exit 9\ncat '{}'\n", s(&sc.join("ocr.tsv")))).unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    let o = localize(&sc, &["--ocr-engine", s(&script)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(position_error(&stdout_json(&o), &truth(&sc)) < 0.1);

    fs::write(&script, "#!/bin/sh\nexit 2\n").unwrap();
    let o = localize(&sc, &["--ocr-engine", s(&script)]);
    assert_eq!(o.status.code(), Some(6));
    assert_eq!(stdout_json(&o)["error"]["code"], "engine_failure");
}

#[test]
fn validate_floorplan_lists_violations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    let lm = |id: &str, text: &str, n: [f64; 2]| {
        json!({"id": id, "text": text, "anchor": [0, 0, 1.5], "wall_normal": n, "box_width_m": 0.1})
    };
    let write = |lms: Vec<Value>| {
        fs::write(&path, json!({"name": "p", "units": "meters", "landmarks": lms}).to_string()).unwrap();
    };

    write(vec![lm("a", "4010", [0.6, 0.8]), lm("b", "4148", [1.0, 0.0])]);
    let o = plateloc(&["validate-floorplan", s(&path)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["landmarks"], 2);

    write(vec![lm("a", "4010", [0.0, 1.0]), lm("b", "4010", [3.0, 4.0])]);
    let o = plateloc(&["validate-floorplan", s(&path)]);
    assert_eq!(o.status.code(), Some(7));
    let kinds: Vec<String> = stdout_json(&o)["error"]["details"]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["kind"].as_str().unwrap().to_string())
        .collect();
    assert!(kinds.contains(&"duplicate_text".to_string()), "{kinds:?}");
    assert!(kinds.contains(&"non_unit_normal".to_string()), "{kinds:?}");

    fs::write(&path, "[").unwrap();
    assert_eq!(plateloc(&["validate-floorplan", s(&path)]).status.code(), Some(1));
}

/// Five scenes sharing one plan; the last one shows an unmapped plate.
fn batch(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let mut entries = Vec::new();
    for (i, theta) in [-30.0, -10.0, 5.0, 20.0, 35.0].iter().enumerate() {
        let name = format!("q{i}");
        let th = theta.to_string();
        let sc = scene(dir, &name, &["--depth", "2", "--theta-deg", &th]);
        let mut t = truth(&sc);
        if i == 4 {
            fs::write(sc.join("ocr.tsv"), fs::read_to_string(sc.join("ocr.tsv")).unwrap().replace("4010", "4011")).unwrap();
        }
        t.as_object_mut().unwrap().remove("landmark_id");
        entries.push(json!({
            "image_path": format!("{name}/scene.png"),
            "ocr_mock": format!("{name}/ocr.tsv"),
            "ground_truth": t,
        }));
    }
    let manifest = dir.join("manifest.json");
    fs::write(&manifest, json!({ "entries": entries }).to_string()).unwrap();
    (manifest, dir.join("q0/calib.json"), dir.join("q0/floorplan.json"))
}

#[test]
fn evaluate_batch() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, calib, plan) = batch(dir.path());
    let cdf = dir.path().join("cdf.csv");
    let o = plateloc(&[
        "evaluate", "--manifest", s(&manifest), "--calib", s(&calib), "--floorplan", s(&plan), "--cdf", s(&cdf),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let r = &stdout_json(&o)["report"];
    assert!((r["recognition_rate"].as_f64().unwrap() - 0.8).abs() < 1e-12);
    assert!(r["mean_error_m"].as_f64().unwrap() < 0.05, "{}", r["mean_error_m"]);
    assert_eq!(r["records"][4]["status"], "unknown_landmark");

    let text = fs::read_to_string(&cdf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("error_m,fraction"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[0].0 <= w[1].0));
    assert_eq!(rows.last().unwrap().1, 1.0);
}

#[test]
fn synth_bench_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let o = plateloc(&["synth-bench", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let head = |f: &str| fs::read_to_string(out.join(f)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(head("theta_rms.csv"), "phi_deg,theta_rms_deg");
    assert_eq!(head("depth_rms.csv"), "phi_deg,depth_rms_norm");
    for f in ["sensitivity_theta_xhor.csv", "sensitivity_depth_theta.csv", "sensitivity_depth_width.csv"] {
        assert_eq!(head(f), "x_var,analytic,finite_diff");
    }
    let theta = fs::read_to_string(out.join("theta_rms.csv")).unwrap();
    assert_eq!(theta.lines().count(), 14);
    assert!(theta.lines().skip(1).all(|l| l.split(',').all(|x| x.contains('.'))));
    let aov = stdout_json(&o)["aov_rms_deg"].as_f64().unwrap();
    assert!((3.2..=6.2).contains(&aov), "{aov}");
}
