//! JSON reports written by every command.

use serde::{Deserialize, Serialize};

use nagumo_core::checkers::{Decision, Verdict};
use nagumo_core::dynamics::Exit;
use nagumo_core::sets::BoundaryTag;
use nagumo_core::tangent::TangentCone;

use crate::problem::{ResolvedOptions, SystemKind, SCHEMA};

pub const EXIT_INVARIANT: i32 = 0;
pub const EXIT_NOT_INVARIANT: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 64;
pub const EXIT_NOT_ON_BOUNDARY: i32 = 65;
pub const EXIT_NUMERICAL: i32 = 70;

pub fn exit_code(d: Decision) -> i32 {
    match d {
        Decision::Invariant => EXIT_INVARIANT,
        Decision::NotInvariant => EXIT_NOT_INVARIANT,
        Decision::Unknown => EXIT_UNKNOWN,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

impl Tool {
    pub fn current() -> Self {
        Self {
            name: "nagumo".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetInfo {
    pub family: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Falsification {
    pub n_starts: usize,
    pub horizon: f64,
    pub step: f64,
    pub seed: u64,
    pub exit: Option<Exit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentReport {
    pub point: Vec<f64>,
    pub tag: BoundaryTag,
    pub cone: TangentCone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool: Tool,
    pub command: String,
    pub set: SetInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub falsification: Option<Falsification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangent: Option<TangentReport>,
    pub options: ResolvedOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Vec<Phase>>,
}

impl Report {
    pub fn new(command: &str, set: SetInfo, options: ResolvedOptions) -> Self {
        Self {
            schema: SCHEMA.into(),
            tool: Tool::current(),
            command: command.into(),
            set,
            system: None,
            decision: None,
            verdict: None,
            falsification: None,
            tangent: None,
            options,
            timing: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Input,
    NotOnBoundary,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: ErrorKind,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub schema: String,
    pub tool: Tool,
    pub error: ErrorInfo,
}

impl ErrorReport {
    pub fn new(kind: ErrorKind, path: Option<String>, message: String) -> Self {
        let exit_code = match kind {
            ErrorKind::Input => EXIT_INPUT,
            ErrorKind::NotOnBoundary => EXIT_NOT_ON_BOUNDARY,
            ErrorKind::Numerical => EXIT_NUMERICAL,
        };
        Self {
            schema: SCHEMA.into(),
            tool: Tool::current(),
            error: ErrorInfo {
                kind,
                exit_code,
                path,
                message,
            },
        }
    }
}
