//! Crate-wide error type.

use crate::scenario::BindingViolation;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown template: {0}")]
    UnknownTemplate(String),

    #[error("template already registered: {0}")]
    DuplicateTemplate(String),

    #[error("invalid template {template_id}: {reason}")]
    InvalidTemplate { template_id: String, reason: String },

    #[error("invalid bindings: {}", format_violations(.0))]
    InvalidBindings(Vec<BindingViolation>),

    #[error("unknown controller: {0}")]
    UnknownController(String),

    #[error("controller name already registered: {0}")]
    DuplicateName(String),

    #[error("controller produced a non-finite command at t = {time} s")]
    NonFiniteCommand { time: f64 },

    #[error("trace has no frames")]
    EmptyTrace,

    #[error("scenario has no non-ego actors")]
    NoOtherActors,

    #[error("population size must be at least 2, got {0}")]
    BadPopulationSize(usize),

    #[error("population member {0} has no fitness assigned")]
    UnevaluatedMember(usize),

    #[error("invalid campaign: {0}")]
    InvalidCampaign(String),

    #[error("frames unavailable: {0}")]
    FramesUnavailable(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_violations(violations: &[BindingViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
