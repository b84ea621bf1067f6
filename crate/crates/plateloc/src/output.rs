//! Machine-readable error codes, exit codes and the JSON output envelope.

use serde::Serialize;
use serde_json::{json, Value};

use plateloc_core::PipelineError;

use crate::config::OverrideError;
use crate::evaluate::ManifestError;
use crate::io::LoadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Unreadable or malformed input file, or bad calibration.
    Io,
    Usage,
    NoLandmarkRecognized,
    UnknownLandmark,
    NoConsensus,
    EngineFailure,
    InvalidFloorPlan,
    /// Measurements with no valid pose (depth or angle out of domain).
    PoseFailure,
}

impl ErrorCode {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Io => 1,
            Self::Usage => 2,
            Self::NoLandmarkRecognized => 3,
            Self::UnknownLandmark => 4,
            Self::NoConsensus => 5,
            Self::EngineFailure => 6,
            Self::InvalidFloorPlan => 7,
            Self::PoseFailure => 8,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Io => "io",
            Self::Usage => "usage",
            Self::NoLandmarkRecognized => "no_landmark_recognized",
            Self::UnknownLandmark => "unknown_landmark",
            Self::NoConsensus => "no_consensus",
            Self::EngineFailure => "engine_failure",
            Self::InvalidFloorPlan => "invalid_floor_plan",
            Self::PoseFailure => "pose_failure",
        }
    }
}

/// Any error a subcommand can end with.
#[derive(Debug)]
pub struct CliError {
    pub code: ErrorCode,
    pub message: String,
    /// Structured extras, e.g. unmatched texts or floor-plan violations.
    pub details: Option<Value>,
}

impl CliError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            details: None,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Usage, message)
    }

    pub fn to_json(&self, config: Option<&Value>) -> Value {
        let mut error = json!({"code": self.code, "message": self.message});
        if let Some(d) = &self.details {
            error["details"] = d.clone();
        }
        let mut out = json!({"status": "error", "error": error});
        if let Some(c) = config {
            out["config"] = c.clone();
        }
        out
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let message = e.to_string();
        match e {
            PipelineError::NoLandmarkRecognized => Self::new(ErrorCode::NoLandmarkRecognized, message),
            PipelineError::UnknownLandmark { texts } => Self {
                code: ErrorCode::UnknownLandmark,
                message,
                details: Some(json!({ "texts": texts })),
            },
            PipelineError::NoConsensus(_) => Self::new(ErrorCode::NoConsensus, message),
            PipelineError::EngineFailure(_) => Self::new(ErrorCode::EngineFailure, message),
            PipelineError::Camera(_) => Self::new(ErrorCode::Io, message),
            PipelineError::Pose(_) => Self::new(ErrorCode::PoseFailure, message),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match &e {
            LoadError::InvalidFloorPlan {
                source: plateloc_core::FloorPlanError::Validation(v),
                ..
            } => Self {
                code: ErrorCode::InvalidFloorPlan,
                message: e.to_string(),
                details: Some(json!({ "violations": v })),
            },
            LoadError::InvalidFloorPlan { .. } => Self::new(ErrorCode::InvalidFloorPlan, e.to_string()),
            _ => Self::new(ErrorCode::Io, e.to_string()),
        }
    }
}

impl From<OverrideError> for CliError {
    fn from(e: OverrideError) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<ManifestError> for CliError {
    fn from(e: ManifestError) -> Self {
        Self::new(ErrorCode::Io, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(ErrorCode::Io, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::new(ErrorCode::Io, e.to_string())
    }
}
