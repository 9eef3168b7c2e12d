//! Scenario files in, CSV and canonical JSON out.

mod csv;
mod report;
mod scenario;

pub use csv::{fmt_f64, write_grid_csv, write_lanchester_csv, write_trajectory_csv};
pub use report::{to_canonical_json, write_report_json, Gains, RunReport, REPORT_SCHEMA};
pub use scenario::{parse_scenario, parse_scenario_with_overrides, ModelKind, Scenario, ScenarioError};
