//! Subcommands of the `plateloc` binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use plateloc_core::pipeline::{localize_image, Trace};
use plateloc_core::pose::localize;
use plateloc_core::synth::render::{render_scene, RenderParams};
use plateloc_core::synth::{aov_rms_deg, project_box, rms_curves, sensitivity_report, SensitivityRow, SyntheticScene};
use plateloc_core::{
    CameraIntrinsics, FloorPlan, GrayImage, Landmark, MockEngine, OcrEngine, PoseEstimate,
};

use crate::config::{apply_overrides, BenchConfig, RunConfig};
use crate::engine::ProcessEngine;
use crate::evaluate::{record, summarize, write_cdf_csv, write_csv, QueryFailure, QueryManifest};
use crate::io::{
    load_calibration, load_floorplan, load_image, read_floorplan_unchecked, read_json, read_text, save_floorplan,
    save_png, write_json,
};
use crate::output::{CliError, ErrorCode};

#[derive(Debug, Parser)]
#[command(name = "plateloc", version, about = "Locate a camera from room-number plates on a floor plan")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Localize one query image.
    Localize(LocalizeArgs),
    /// Localize every entry of a manifest and score against ground truth.
    Evaluate(EvaluateArgs),
    /// Write the angle/depth error curves and sensitivity tables as CSV.
    SynthBench(BenchArgs),
    /// Check a floor-plan document and list every violation.
    ValidateFloorplan {
        path: PathBuf,
    },
    /// Render a synthetic query with matching calibration, plan and OCR script.
    SynthScene(SceneArgs),
}

/// Settings shared by commands that run the pipeline.
#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub calib: PathBuf,
    #[arg(long)]
    pub floorplan: PathBuf,
    /// OCR engine command; the image path is appended as the last argument.
    #[arg(long)]
    pub ocr_engine: Option<String>,
    /// File of scripted engine output used instead of a real engine.
    #[arg(long, conflicts_with = "ocr_engine")]
    pub ocr_mock: Option<PathBuf>,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override one setting, e.g. `pipeline.ransac.iterations=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Skip the joint angle/depth refinement.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Debug, Args)]
pub struct LocalizeArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    /// Where to write the error CDF as CSV.
    #[arg(long)]
    pub cdf: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.5)]
    pub depth: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta_deg: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi_deg: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub roll_deg: f64,
    #[arg(long, default_value = "4010")]
    pub text: String,
    /// Standard deviation (px) of the noise on the scripted OCR box corners.
    #[arg(long, default_value_t = 0.0)]
    pub noise_px: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let mut stdout = std::io::stdout().lock();
    let (value, code) = match cli.command {
        Command::Localize(a) => cmd_localize(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::SynthBench(a) => cmd_synth_bench(&a),
        Command::ValidateFloorplan { path } => cmd_validate_floorplan(&path),
        Command::SynthScene(a) => cmd_synth_scene(&a),
    };
    let text = serde_json::to_string_pretty(&value).expect("output serializes");
    let _ = writeln!(stdout, "{text}");
    if code != 0 {
        if let Some(msg) = value.pointer("/error/message").and_then(Value::as_str) {
            eprintln!("plateloc: {msg}");
        }
    }
    code
}

fn finish(result: Result<Value, CliError>, config: Option<&Value>) -> (Value, i32) {
    match result {
        Ok(v) => (v, 0),
        Err(e) => (e.to_json(config), e.code.exit_code()),
    }
}

/// Config file, then `--seed`, `--no-refine` and `--set` overrides.
pub fn effective_config(a: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.no_refine {
        cfg.pipeline.refine = false;
    }
    let cfg = apply_overrides(&cfg, &a.overrides)?;
    if !(cfg.ocr_timeout_s > 0.0 && cfg.ocr_timeout_s.is_finite()) {
        return Err(CliError::usage("ocr_timeout_s must be positive"));
    }
    Ok(cfg.normalized())
}

enum Engine {
    Mock(MockEngine),
    Process(ProcessEngine),
}

impl Engine {
    fn as_dyn(&self) -> &dyn OcrEngine {
        match self {
            Self::Mock(m) => m,
            Self::Process(p) => p,
        }
    }
}

fn mock_engine(path: &Path) -> Result<Engine, CliError> {
    let text = read_text(path)?;
    let m = MockEngine::from_protocol(&text)
        .map_err(|e| CliError::new(ErrorCode::Io, format!("{}: {e}", path.display())))?;
    Ok(Engine::Mock(m))
}

fn engine(a: &RunArgs, cfg: &RunConfig, mock_override: Option<&Path>) -> Result<Engine, CliError> {
    if let Some(p) = mock_override.or(a.ocr_mock.as_deref()) {
        return mock_engine(p);
    }
    match &a.ocr_engine {
        Some(cmd) => ProcessEngine::new(cmd)
            .map(|e| Engine::Process(e.with_timeout(Duration::from_secs_f64(cfg.ocr_timeout_s))))
            .ok_or_else(|| CliError::usage("empty --ocr-engine command")),
        None => Err(CliError::usage("no OCR engine: pass --ocr-engine or --ocr-mock")),
    }
}

fn query(
    image: &Path,
    k: &CameraIntrinsics,
    plan: &FloorPlan,
    engine: &Engine,
    cfg: &RunConfig,
) -> Result<(PoseEstimate, Trace), CliError> {
    let img: GrayImage = load_image(image)?;
    Ok(localize_image(&img, k, plan, engine.as_dyn(), &cfg.pipeline)?)
}

fn config_json(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

pub fn cmd_localize(a: &LocalizeArgs) -> (Value, i32) {
    let cfg = match effective_config(&a.run) {
        Ok(c) => c,
        Err(e) => return finish(Err(e), None),
    };
    let cv = config_json(&cfg);
    let result = (|| {
        let k = load_calibration(&a.run.calib)?;
        let plan = load_floorplan(&a.run.floorplan)?;
        let eng = engine(&a.run, &cfg, None)?;
        let (pose, trace) = query(&a.image, &k, &plan, &eng, &cfg)?;
        Ok(json!({"status": "ok", "pose": pose, "trace": trace, "config": cv}))
    })();
    finish(result, Some(&cv))
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> (Value, i32) {
    let cfg = match effective_config(&a.run) {
        Ok(c) => c,
        Err(e) => return finish(Err(e), None),
    };
    let cv = config_json(&cfg);
    let result = (|| {
        let manifest: QueryManifest = read_json(&a.manifest)?;
        manifest.validate()?;
        let base = a.manifest.parent().unwrap_or(Path::new("."));
        let k = load_calibration(&a.run.calib)?;
        let plan = load_floorplan(&a.run.floorplan)?;
        let records = manifest
            .entries
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                let mock = entry.ocr_mock.as_ref().map(|p| base.join(p));
                let outcome = engine(&a.run, &cfg, mock.as_deref())
                    .and_then(|eng| query(&base.join(&entry.image_path), &k, &plan, &eng, &cfg))
                    .map(|(pose, _)| pose)
                    .map_err(|e| QueryFailure {
                        code: e.code.as_str().into(),
                        message: e.message,
                    });
                record(i, entry, outcome)
            })
            .collect();
        let report = summarize(records);
        if let Some(p) = &a.cdf {
            write_cdf_csv(fs::File::create(p)?, &report.cdf)?;
        }
        Ok(json!({"status": "ok", "report": report, "config": cv}))
    })();
    finish(result, Some(&cv))
}

fn rows(table: &[SensitivityRow]) -> impl Iterator<Item = Vec<f64>> + '_ {
    table.iter().map(|r| vec![r.x_var, r.analytic, r.finite_diff])
}

pub fn cmd_synth_bench(a: &BenchArgs) -> (Value, i32) {
    let cfg = (|| {
        let cfg = match &a.config {
            Some(p) => read_json::<BenchConfig>(p)?,
            None => BenchConfig::default(),
        };
        Ok::<_, CliError>(apply_overrides(&cfg, &a.overrides)?)
    })();
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => return finish(Err(e), None),
    };
    let cv = serde_json::to_value(&cfg).expect("config serializes");
    let result = (|| {
        fs::create_dir_all(&a.out)?;
        let curves = rms_curves(&cfg.curves);
        let file = |name: &str| fs::File::create(a.out.join(name));
        write_csv(
            file("theta_rms.csv")?,
            &["phi_deg", "theta_rms_deg"],
            curves.iter().map(|r| vec![r.phi_deg, r.theta_rms_deg]),
        )?;
        write_csv(
            file("depth_rms.csv")?,
            &["phi_deg", "depth_rms_norm"],
            curves.iter().map(|r| vec![r.phi_deg, r.depth_rms_norm]),
        )?;
        let sens = sensitivity_report(&cfg.sensitivity);
        let header = ["x_var", "analytic", "finite_diff"];
        write_csv(file("sensitivity_theta_xhor.csv")?, &header, rows(&sens.theta_vs_xhor))?;
        write_csv(file("sensitivity_depth_theta.csv")?, &header, rows(&sens.depth_vs_theta))?;
        write_csv(file("sensitivity_depth_width.csv")?, &header, rows(&sens.depth_vs_width))?;
        Ok(json!({
            "status": "ok",
            "aov_rms_deg": aov_rms_deg(&cfg.curves),
            "curves": curves,
            "config": cv,
        }))
    })();
    finish(result, Some(&cv))
}

pub fn cmd_validate_floorplan(path: &Path) -> (Value, i32) {
    let plan = match read_floorplan_unchecked(path) {
        Ok(p) => p,
        Err(e) => return finish(Err(e.into()), None),
    };
    let violations = plan.violations();
    if violations.is_empty() {
        return (json!({"status": "ok", "name": plan.name, "landmarks": plan.landmarks.len()}), 0);
    }
    let listed: Vec<Value> = violations
        .iter()
        .map(|v| {
            let mut j = serde_json::to_value(v).expect("violation serializes");
            j["message"] = json!(v.to_string());
            j
        })
        .collect();
    let err = CliError {
        code: ErrorCode::InvalidFloorPlan,
        message: format!("{} violation(s)", listed.len()),
        details: Some(json!({ "violations": listed })),
    };
    (err.to_json(None), err.code.exit_code())
}

pub fn cmd_synth_scene(a: &SceneArgs) -> (Value, i32) {
    let result = (|| {
        let scene = SyntheticScene {
            d: a.depth,
            theta: a.theta_deg.to_radians(),
            phi: a.phi_deg.to_radians(),
            roll: a.roll_deg.to_radians(),
            noise_px: a.noise_px,
            seed: a.seed,
            ..SyntheticScene::default()
        };
        scene
            .validate()
            .map_err(|e| CliError::usage(e.to_string()))?;
        let lm = Landmark {
            id: format!("L-{}", a.text),
            text: a.text.clone(),
            anchor: [0.0, 0.0, 1.5],
            wall_normal: [0.0, 1.0],
            box_width_m: scene.box_w,
            box_height_m: Some(scene.box_h),
            centroid_height_m: None,
        };
        let plan = FloorPlan {
            name: "synthetic".into(),
            units: "meters".into(),
            landmarks: vec![lm.clone()],
        };
        plan.validate()
            .map_err(|e| CliError::usage(format!("text {:?}: {e}", a.text)))?;
        // the scripted box is what an engine would see after derotation
        let b = project_box(&SyntheticScene { roll: 0.0, ..scene })
            .map_err(|e| CliError::usage(e.to_string()))?
            .ocr_box(&a.text);
        let img = render_scene(&scene, &a.text, &RenderParams::default());

        fs::create_dir_all(&a.out)?;
        save_png(&img, &a.out.join("scene.png")).map_err(|e| CliError::new(ErrorCode::Io, e.to_string()))?;
        write_json(&scene.k, &a.out.join("calib.json"))?;
        save_floorplan(&plan, &a.out.join("floorplan.json"))?;
        fs::write(a.out.join("ocr.tsv"), plateloc_core::ocr::format_engine_output(&[b]))?;
        let world = localize(scene.theta, scene.d, &lm);
        let truth = json!({
            "world": world,
            "landmark_id": lm.id,
            "text": lm.text,
            "theta_deg": a.theta_deg,
            "depth_m": a.depth,
        });
        write_json(&truth, &a.out.join("truth.json"))?;
        Ok(json!({"status": "ok", "out": a.out, "truth": truth, "scene": scene}))
    })();
    finish(result, None)
}
