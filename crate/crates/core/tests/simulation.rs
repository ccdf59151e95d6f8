//! Closed-loop runs through the public library interface.

mod common;

use std::cell::RefCell;
use std::rc::Rc;

use common::{bundled_scenario, plant, players, run};
use raceway_core::control::{ControlSignals, Controller, ControllerSelection, ControllerSet, FnController};
use raceway_core::evaluation::{compute_kpis, loop_costs, CostWeights};
use raceway_core::io::{generate_synthetic_scenario, SyntheticSpec};
use raceway_core::model::InitialConditions;
use raceway_core::sim::{run_simulation, ActuatorLimits, SimConfig};
use raceway_core::Error;

fn idle(name: &'static str) -> Box<dyn Controller> {
    Box::new(FnController::new(name, |_, _: &mut ControlSignals| Ok(())))
}

#[test]
fn identical_inputs_give_bit_identical_logs() {
    let p = plant();
    let scenario = bundled_scenario(&p, Some(1.0));
    let a = run(&scenario, &mut players(&ControllerSelection::PLAYER_3, &p), &p);
    let b = run(&scenario, &mut players(&ControllerSelection::PLAYER_3, &p), &p);
    assert_eq!(a.len(), 1440);
    for (ra, rb) in a.records.iter().zip(&b.records) {
        let bits = |r: &raceway_core::sim::StepRecord| r.values().map(f64::to_bits);
        assert_eq!(bits(ra), bits(rb), "diverged at t = {}", ra.time);
    }
    assert_eq!(a, b);
}

#[test]
fn log_is_consistent_with_limits_and_time_grid() {
    let p = plant();
    let scenario = bundled_scenario(&p, Some(1.0));
    let log = run(&scenario, &mut players(&ControllerSelection::PLAYER_4, &p), &p);
    let lim = ActuatorLimits::default();
    assert_eq!(log.records[0].x_alg, log.initial_state.x_alg);
    let mut cum = 0.0;
    for (k, r) in log.records.iter().enumerate() {
        assert_eq!(r.time, k as f64 * log.t_m);
        assert!(r.x_alg >= 0.0 && r.dic >= 0.0 && r.h > 0.0 && r.vol > 0.0);
        assert!((0.0..=lim.q_air_max).contains(&r.q_air));
        assert!(r.q_w >= 0.0 && r.q_w <= lim.q_w_max);
        assert!(r.t_in_hx >= lim.t_in_min && r.t_in_hx <= lim.t_in_max);
        assert!(r.q_d == 0.0 || r.q_d == lim.pump_rate);
        assert!(r.q_h == 0.0 || r.q_h == lim.pump_rate);
        assert!(r.cum_harv_g >= cum);
        cum = r.cum_harv_g;
    }
    assert_eq!(log.delay_residue.len(), 5);
}

#[test]
fn slots_run_in_order_once_per_step() {
    let p = plant();
    let scenario = bundled_scenario(&p, Some(0.1));
    let trace = Rc::new(RefCell::new(Vec::new()));
    let slot = |tag: char| {
        let trace = Rc::clone(&trace);
        Box::new(FnController::new(
            tag.to_string(),
            move |ctx, s: &mut ControlSignals| {
                trace.borrow_mut().push((ctx.timeline.index, tag));
                // each slot sees what the earlier ones wrote
                if tag == 'd' {
                    assert_eq!(s.q_co2, 1e-5);
                }
                if tag == 'p' {
                    s.q_co2 = 1e-5;
                }
                Ok(())
            },
        )) as Box<dyn Controller>
    };
    let mut set = ControllerSet::new(slot('p'), slot('d'), slot('h'), slot('t'));
    let log = run(&scenario, &mut set, &p);
    let trace = trace.borrow();
    assert_eq!(trace.len(), 4 * log.len());
    for (i, &(k, tag)) in trace.iter().enumerate() {
        assert_eq!((k, tag), (i / 4, ['p', 'd', 'h', 't'][i % 4]));
    }
    assert_eq!(log.controllers, ["p", "d", "h", "t"].map(String::from));
    // CO2 goes through the delay line before it reaches the plant
    assert_eq!(log.records[4].q_co2, 0.0);
    assert_eq!(log.records[5].q_co2, 1e-5);
}

#[test]
fn bad_controller_output_reports_the_step() {
    let p = plant();
    let scenario = bundled_scenario(&p, Some(0.1));
    let hd = FnController::new("broken", |ctx, s: &mut ControlSignals| {
        if ctx.timeline.index == 17 {
            s.q_h_cmd = 0.5;
        }
        Ok(())
    });
    let mut set = ControllerSet::new(idle("a"), idle("b"), Box::new(hd), idle("c"));
    let err = run_simulation(
        &scenario,
        &mut set,
        &ActuatorLimits::default(),
        &SimConfig::default(),
        &p.model,
        &p.geom,
    )
    .unwrap_err();
    match &err {
        Error::Controller { step, msg } => {
            assert_eq!(*step, 17);
            assert!(msg.contains("q_h_cmd"), "{msg}");
        }
        other => panic!("unexpected error {other}"),
    }
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn baseline_player_six_days_end_to_end() {
    let p = plant();
    let scenario = bundled_scenario(&p, None);
    let log = run(&scenario, &mut players(&ControllerSelection::PLAYER_1, &p), &p);
    assert_eq!(log.len(), 8640);
    let kpi = compute_kpis(&log, &p.geom).unwrap();
    assert_eq!(kpi.biomass_produced_g, (kpi.xf_g - kpi.x0_g) + kpi.harvested_g);
    assert!(kpi.harvested_g > 0.0 && kpi.prod_areal > 0.0);
    let costs = loop_costs(&log, &CostWeights::default()).unwrap();
    for j in [costs.j_ph, costs.j_do, costs.j_temp] {
        assert!(j.is_finite() && j >= 0.0);
    }
    // the baseline never heats or cools
    assert!(log.records.iter().all(|r| r.q_w == 0.0));
}

#[test]
fn synthetic_weather_drives_a_run() {
    let p = plant();
    let spec = SyntheticSpec {
        days: 2,
        ..SyntheticSpec::default()
    };
    let file = generate_synthetic_scenario(&spec).unwrap();
    assert_eq!(file, generate_synthetic_scenario(&spec).unwrap());
    assert_eq!(file.samples.len(), 2 * 288);
    assert_eq!(file.duration(), 2.0 * 86_400.0);
    let night = &file.samples[12];
    assert_eq!((night.rad_global, night.rad_par), (0.0, 0.0));
    let noon = file.samples[144].rad_global;
    assert!(noon > 0.8 * spec.peak_rad && noon <= spec.peak_rad);

    let other = generate_synthetic_scenario(&SyntheticSpec {
        seed: 8,
        ..spec.clone()
    })
    .unwrap();
    assert_ne!(file.samples, other.samples);

    let initial = InitialConditions::default().to_state(&p.geom, &p.model).unwrap();
    let scenario = file.to_scenario(initial, Some(86_400.0)).unwrap();
    let log = run(&scenario, &mut players(&ControllerSelection::PLAYER_2, &p), &p);
    assert_eq!(log.len(), 1440);
    assert!(log.final_state.x_alg > 0.0);
}

#[test]
fn horizon_longer_than_weather_is_rejected() {
    let p = plant();
    let file = generate_synthetic_scenario(&SyntheticSpec {
        days: 1,
        ..Default::default()
    })
    .unwrap();
    let initial = InitialConditions::default().to_state(&p.geom, &p.model).unwrap();
    let err = file.to_scenario(initial, Some(2.0 * 86_400.0)).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}
