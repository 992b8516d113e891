//! Batch front end for the MLZ toolkit: one JSON config per run, CSV and
//! JSON artifacts out, JSON-lines diagnostics on standard error.

pub mod config;
pub mod family;
pub mod output;
pub mod run;
pub mod schema;

use serde_json::{json, Value};

pub use config::{parse_config, Command, ConfigError, RunConfig};
pub use run::{run, Outcome, RunError};

/// Exit status for a successful run.
pub const EXIT_OK: u8 = 0;
/// Exit status for computational failures and failing `verify` reports.
pub const EXIT_COMPUTE: u8 = 1;
/// Exit status for unreadable, malformed or unsatisfiable configs.
pub const EXIT_CONFIG: u8 = 2;

/// One diagnostic line for standard error.
pub fn diagnostic(level: &str, kind: &str, fields: Value) -> String {
    let mut line = json!({ "level": level, "kind": kind });
    if let (Some(obj), Value::Object(extra)) = (line.as_object_mut(), fields) {
        obj.extend(extra);
    }
    line.to_string()
}
