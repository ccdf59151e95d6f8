//! Two days of the PI/turbidostat configuration on the bundled weather.
//!
//! `cargo run --release --example quickstart`

use raceway_core::control::{build_controllers, ControllerSelection, ControllerSettings};
use raceway_core::evaluation::{summarize, CostWeights};
use raceway_core::io::export::summary_text;
use raceway_core::io::{default_parameters, load_scenario};
use raceway_core::model::InitialConditions;
use raceway_core::sim::{run_simulation, ActuatorLimits, SimConfig};

fn main() -> raceway_core::Result<()> {
    let params = default_parameters();
    let model = params.model();
    let geom = params.geometry;
    let initial = InitialConditions::default().to_state(&geom, &model)?;
    let weather = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/scenario_6d.csv");
    let scenario = load_scenario(weather)?.to_scenario(initial, Some(2.0 * 86_400.0))?;

    let limits = ActuatorLimits::default();
    let mut slots = build_controllers(
        &ControllerSelection::PLAYER_3,
        &ControllerSettings::default(),
        &limits,
        &geom,
        &model,
    )?;
    let log = run_simulation(&scenario, &mut slots, &limits, &SimConfig::default(), &model, &geom)?;
    let summary = summarize("pi", &log, &geom, &CostWeights::default())?;
    print!("{}", summary_text(&summary));
    Ok(())
}
