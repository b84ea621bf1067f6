//! Run configuration: one JSON file, overridable from the command line, and
//! echoed into every JSON output.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use plateloc_core::synth::{CurveConfig, SensitivityConfig};
use plateloc_core::PipelineConfig;

use crate::io::{read_json, LoadError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds every RANSAC stream; replaces the seeds inside `pipeline`.
    pub seed: u64,
    pub ocr_timeout_s: f64,
    pub pipeline: PipelineConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            ocr_timeout_s: 10.0,
            pipeline: PipelineConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        read_json(path)
    }

    /// Copies `seed` into the pipeline so the echoed config is what ran.
    pub fn normalized(mut self) -> Self {
        self.pipeline.ransac.seed = self.seed;
        self.pipeline.vertical_ransac.seed = self.seed;
        self
    }
}

/// Settings of `synth-bench`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub curves: CurveConfig,
    pub sensitivity: SensitivityConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum OverrideError {
    #[error("override {0:?} is not of the form key.path=value")]
    Syntax(String),
    #[error("override {key:?}: no such setting")]
    UnknownKey { key: String },
    #[error("override {key:?}: {source}")]
    Invalid {
        key: String,
        #[source]
        source: serde_json::Error,
    },
}

/// Applies `a.b.c=value` overrides. The value is parsed as JSON and falls
/// back to a plain string.
pub fn apply_overrides<T>(config: &T, overrides: &[String]) -> Result<T, OverrideError>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    let mut root = serde_json::to_value(config).expect("config serializes");
    for item in overrides {
        let (key, raw) = item.split_once('=').ok_or_else(|| OverrideError::Syntax(item.clone()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(OverrideError::Syntax(item.clone()));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut slot = &mut root;
        for part in key.split('.') {
            slot = slot
                .as_object_mut()
                .and_then(|m| m.get_mut(part))
                .ok_or_else(|| OverrideError::UnknownKey { key: key.to_string() })?;
        }
        *slot = value;
        // check each step so the error names the offending key
        serde_json::from_value::<T>(root.clone()).map_err(|source| OverrideError::Invalid {
            key: key.to_string(),
            source,
        })?;
    }
    Ok(serde_json::from_value(root).expect("validated above"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let c: RunConfig = serde_json::from_str(r#"{"seed": 4, "pipeline": {"refine": false}}"#).unwrap();
        assert_eq!(c.seed, 4);
        assert!(!c.pipeline.refine);
        assert_eq!(c.pipeline.ransac.iterations, 500);
        assert_eq!(c.ocr_timeout_s, 10.0);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sead": 4}"#).is_err());
    }

    #[test]
    fn seed_reaches_both_ransac_runs() {
        let c = RunConfig {
            seed: 9,
            ..RunConfig::default()
        }
        .normalized();
        assert_eq!(c.pipeline.ransac.seed, 9);
        assert_eq!(c.pipeline.vertical_ransac.seed, 9);
    }

    #[test]
    fn overrides_set_nested_values() {
        let c = apply_overrides(
            &RunConfig::default(),
            &[
                "pipeline.ransac.iterations=50".into(),
                "pipeline.filter.eps_deg=7.5".into(),
                "pipeline.vertical_ransac.metric=image".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.pipeline.ransac.iterations, 50);
        assert_eq!(c.pipeline.filter.eps_deg, 7.5);
        assert_eq!(c.pipeline.vertical_ransac.metric, plateloc_core::InlierMetric::Image);
    }

    #[test]
    fn bad_overrides_are_reported() {
        let base = RunConfig::default();
        assert!(matches!(apply_overrides(&base, &["seed".into()]), Err(OverrideError::Syntax(_))));
        assert!(matches!(
            apply_overrides(&base, &["pipeline.nope=1".into()]),
            Err(OverrideError::UnknownKey { .. })
        ));
        assert!(matches!(
            apply_overrides(&base, &["pipeline.refine=maybe".into()]),
            Err(OverrideError::Invalid { .. })
        ));
    }
}
