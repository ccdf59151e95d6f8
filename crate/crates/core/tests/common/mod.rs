#![allow(dead_code)]

use std::path::PathBuf;

use raceway_core::control::{build_controllers, ControllerSelection, ControllerSet, ControllerSettings};
use raceway_core::io::{default_parameters, load_scenario, ParameterSet};
use raceway_core::model::{InitialConditions, ModelParameters, ReactorGeometry};
use raceway_core::sim::{run_simulation, ActuatorLimits, ResultsLog, Scenario, SimConfig};

pub fn assets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets")
}

pub fn player_manifest(n: usize) -> PathBuf {
    assets().join("players").join(format!("player{n}.toml"))
}

pub struct Plant {
    pub set: ParameterSet,
    pub geom: ReactorGeometry,
    pub model: ModelParameters,
}

pub fn plant() -> Plant {
    let set = default_parameters();
    let geom = set.geometry;
    let model = set.model();
    Plant { set, geom, model }
}

/// The bundled 6-day scenario starting from the default initial condition.
pub fn bundled_scenario(p: &Plant, days: Option<f64>) -> Scenario {
    let file = load_scenario(assets().join("scenario_6d.csv")).unwrap();
    let initial = InitialConditions::default().to_state(&p.geom, &p.model).unwrap();
    file.to_scenario(initial, days.map(|d| d * 86_400.0)).unwrap()
}

pub fn players(sel: &ControllerSelection, p: &Plant) -> ControllerSet {
    build_controllers(
        sel,
        &ControllerSettings::default(),
        &ActuatorLimits::default(),
        &p.geom,
        &p.model,
    )
    .unwrap()
}

pub fn run(scenario: &Scenario, controllers: &mut ControllerSet, p: &Plant) -> ResultsLog {
    run_simulation(
        scenario,
        controllers,
        &ActuatorLimits::default(),
        &SimConfig::default(),
        &p.model,
        &p.geom,
    )
    .unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
