//! JSON scenarios: a state, an optional power family and a list of tasks.
//!
//! ```
//! use qtool_core::scenario::{parse_scenario, run_scenario};
//!
//! let s = parse_scenario(r#"{
//!     "name": "singlet correlations",
//!     "state_spec": "singlet",
//!     "tasks": [{"kind": "correlation", "a": "sigma_z", "b": "sigma_z"}]
//! }"#).unwrap();
//! let report = run_scenario(&s);
//! let joint = report.tasks[0].result.as_ref().unwrap()["joint"].as_f64().unwrap();
//! assert!((joint + 1.0).abs() < 1e-12);
//! ```

mod parse;
mod render;
mod run;

pub use parse::{
    fixture_catalogue, parse_scenario, parse_scenario_with_seed, OutcomeChoice, Scenario,
    ScenarioError, Task,
};
pub use render::{format_g17, render_csv, render_json, to_json_string, CSV_HEADER};
pub use run::{run_scenario, Report, TaskOutcome, TaskStatus};
