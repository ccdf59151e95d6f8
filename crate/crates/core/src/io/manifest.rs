//! Run manifests and end-to-end execution of one configured run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::params::{default_parameters, load_parameters, ParameterSet};
use super::scenario::{load_scenario, ScenarioFile};
use crate::control::{build_controllers, ControllerSelection, ControllerSettings};
use crate::error::{Error, Result};
use crate::evaluation::{summarize, CostWeights, RunSummary};
use crate::model::InitialConditions;
use crate::sim::{run_simulation, ActuatorLimits, ResultsLog, SimConfig};

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(default)]
    pub label: String,
    /// Scenario file, relative to the manifest.
    pub scenario: PathBuf,
    /// Parameter file, relative to the manifest; built-in defaults when absent.
    #[serde(default)]
    pub params: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Reserved for stochastic extensions; the benchmark itself is deterministic.
    #[serde(default)]
    pub seed: u64,
    /// Simulated days; the whole scenario when absent.
    #[serde(default)]
    pub days: Option<f64>,
    pub controllers: ControllerSelection,
    #[serde(default)]
    pub controller_settings: ControllerSettings,
    #[serde(default)]
    pub limits: ActuatorLimits,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub initial: InitialConditions,
}

impl RunManifest {
    pub fn new(scenario: PathBuf, controllers: ControllerSelection) -> Self {
        RunManifest {
            label: String::new(),
            scenario,
            params: None,
            output_dir: None,
            seed: 0,
            days: None,
            controllers,
            controller_settings: ControllerSettings::default(),
            limits: ActuatorLimits::default(),
            sim: SimConfig::default(),
            initial: InitialConditions::default(),
        }
    }

    /// Makes relative paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.scenario);
        if let Some(p) = self.params.as_mut() {
            fix(p);
        }
        if let Some(p) = self.output_dir.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.controller_settings.validate()?;
        self.limits.validate()?;
        self.sim.validate()?;
        if let Some(d) = self.days {
            if !(d > 0.0) {
                return Err(Error::Config(format!("days must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

pub fn parse_manifest(text: &str) -> Result<RunManifest> {
    let m: RunManifest = toml::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))?;
    m.validate()?;
    Ok(m)
}

pub fn emit_manifest(m: &RunManifest) -> Result<String> {
    toml::to_string(m).map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))
}

/// Reads a manifest and resolves its paths against the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<RunManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut m = parse_manifest(&text)?;
    m.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(m)
}

/// Inputs of a run after all files were read.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub manifest: RunManifest,
    pub params: ParameterSet,
    pub scenario: ScenarioFile,
}

impl PreparedRun {
    pub fn load(manifest: RunManifest) -> Result<Self> {
        let params = match &manifest.params {
            Some(p) => load_parameters(p)?,
            None => default_parameters(),
        };
        let scenario = load_scenario(&manifest.scenario)?;
        Ok(PreparedRun {
            manifest,
            params,
            scenario,
        })
    }

    pub fn execute(&self) -> Result<ResultsLog> {
        let m = &self.manifest;
        let geom = &self.params.geometry;
        let model = self.params.model();
        let initial = m.initial.to_state(geom, &model)?;
        let horizon = m.days.map(|d| (d * 86_400.0 / m.sim.t_m).round() * m.sim.t_m);
        let scenario = self.scenario.to_scenario(initial, horizon)?;
        let mut controllers = build_controllers(&m.controllers, &m.controller_settings, &m.limits, geom, &model)?;
        run_simulation(&scenario, &mut controllers, &m.limits, &m.sim, &model, geom)
    }

    pub fn summarize(&self, log: &ResultsLog) -> Result<RunSummary> {
        let label = if self.manifest.label.is_empty() {
            "run"
        } else {
            &self.manifest.label
        };
        summarize(label, log, &self.params.geometry, &CostWeights::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{HdMode, TempMode};

    const MINIMAL: &str = r#"
scenario = "weather.csv"

[controllers]
ph = "pi"
do = "pi"
hd = "empc"
temp = "pi"
"#;

    #[test]
    fn minimal_manifest_uses_defaults() {
        let m = parse_manifest(MINIMAL).unwrap();
        assert_eq!(m.controllers.hd, HdMode::Empc);
        assert_eq!(m.controllers.temp, TempMode::Pi);
        assert_eq!(m.limits, ActuatorLimits::default());
        assert!(m.params.is_none());
    }

    #[test]
    fn unknown_controller_rejected() {
        let text = MINIMAL.replace("\"empc\"", "\"mpc\"");
        assert!(matches!(parse_manifest(&text), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("bogus = 1\n{MINIMAL}");
        assert!(parse_manifest(&text).is_err());
    }

    #[test]
    fn emit_parse_identity() {
        let m = parse_manifest(MINIMAL).unwrap();
        let text = emit_manifest(&m).unwrap();
        assert_eq!(parse_manifest(&text).unwrap(), m);
    }

    #[test]
    fn relative_paths_resolved() {
        let mut m = parse_manifest(MINIMAL).unwrap();
        m.resolve_paths(Path::new("/data/runs"));
        assert_eq!(m.scenario, PathBuf::from("/data/runs/weather.csv"));
    }
}
