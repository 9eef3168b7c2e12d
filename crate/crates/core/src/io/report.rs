//! Canonical JSON reports.
//!
//! Canonical means: object keys in lexicographic order, no whitespace between
//! tokens, numbers in shortest round-trip form, no trailing newline. Equal
//! inputs therefore give byte-identical files.
//!
//! Report layout (`"schema":"sancdyn-report-v1"`):
//!
//! | key | present for | content |
//! |-----|-------------|---------|
//! | `command` | all | subcommand that produced the report |
//! | `scenario` | scenario runs | scenario echo, same shape as the input file |
//! | `gains` | scenario runs | `q`, plus `qbar` and `noise_floor` when stochastic |
//! | `verdict` | deterministic / stochastic | class of `q` |
//! | `mean_square_verdict` | stochastic | class of `qbar` |
//! | `outputs` | all | map of artifact name to file path |
//! | `monte_carlo` | `montecarlo` | Monte Carlo report |
//! | `comparison` | `analyze` on stochastic | analytic vs empirical record |
//! | `growth` | `analyze` | fitted log growth rate |
//! | `summary` | all | run-specific scalars (stages, limits, counts) |

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::Value;

use super::scenario::Scenario;
use crate::analysis::{Comparison, GrowthEstimate};
use crate::dynamics::StabilityClass;
use crate::stochastic::MonteCarloReport;

pub const REPORT_SCHEMA: &str = "sancdyn-report-v1";

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Gains {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qbar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "scenario_json")]
    pub scenario: Option<Scenario>,
    pub gains: Gains,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<StabilityClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_square_verdict: Option<StabilityClass>,
    pub outputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthEstimate>,
    pub summary: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            command: command.into(),
            scenario: None,
            gains: Gains::default(),
            verdict: None,
            mean_square_verdict: None,
            outputs: BTreeMap::new(),
            monte_carlo: None,
            comparison: None,
            growth: None,
            summary: BTreeMap::new(),
        }
    }
}

fn scenario_json<S: serde::Serializer>(s: &Option<Scenario>, ser: S) -> Result<S::Ok, S::Error> {
    s.as_ref().map(Scenario::to_json).serialize(ser)
}

/// Serialize anything to its canonical JSON text.
pub fn to_canonical_json<T: Serialize>(value: &T) -> io::Result<String> {
    // Going through `Value` sorts keys: its map is a BTreeMap.
    let v = serde_json::to_value(value).map_err(io::Error::other)?;
    if has_null_number(&v) {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "non-finite number in report"));
    }
    serde_json::to_string(&v).map_err(io::Error::other)
}

// serde_json maps NaN/inf to null; reports never legitimately contain null.
fn has_null_number(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::Array(a) => a.iter().any(has_null_number),
        Value::Object(o) => o.values().any(has_null_number),
        _ => false,
    }
}

pub fn write_report_json<W: Write>(report: &RunReport, mut sink: W) -> io::Result<()> {
    let intervals = report
        .monte_carlo
        .iter()
        .map(|m| (m.ci_low, m.ci_high))
        .chain(report.comparison.iter().map(|c| (c.ci_low, c.ci_high)));
    for (lo, hi) in intervals {
        if !(lo <= hi) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("confidence interval out of order: [{lo}, {hi}]"),
            ));
        }
    }
    sink.write_all(to_canonical_json(report)?.as_bytes())?;
    sink.flush()
}
