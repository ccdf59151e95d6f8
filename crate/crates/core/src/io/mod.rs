//! File formats: parameter sets, scenarios, manifests and result exports.

pub mod export;
pub mod manifest;
pub mod params;
pub mod scenario;

pub use export::{export_results, load_results, RunInfo};
pub use manifest::{load_manifest, parse_manifest, PreparedRun, RunManifest};
pub use params::{default_parameters, emit_parameters, load_parameters, parse_parameters, ParameterSet};
pub use scenario::{
    emit_scenario, generate_synthetic_scenario, load_scenario, parse_scenario, ScenarioFile, SyntheticSpec,
};

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
