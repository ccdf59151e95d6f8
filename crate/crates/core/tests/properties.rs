//! Property-based checks of model and controller invariants.

mod common;

use proptest::prelude::*;

use common::plant;
use raceway_core::control::{
    ControlContext, ControlSignals, Controller, Forecast, Hysteresis, Observation, References, Timeline, Turbidostat,
};
use raceway_core::evaluation::{cost_consumption, cost_smoothness};
use raceway_core::io::{emit_scenario, fmt_f64, parse_scenario, ScenarioFile};
use raceway_core::model::carbonate::{dic_for_proton, equilibrium_proton};
use raceway_core::model::{
    biological_rates, compute_outputs, dissociation_constants, par_from_global, proton_derivative, smooth_window,
    speciate_carbonates, thermal_fluxes, ActuatorInputs, EquilibriumSet, MeteoSample, StateVector,
};

fn meteo() -> impl Strategy<Value = MeteoSample> {
    (0.0..1200.0f64, -5.0..40.0f64, 0.0..=100.0f64, 0.0..10.0f64).prop_map(|(rad, t, rh, wind)| MeteoSample {
        rad_global: rad,
        rad_par: par_from_global(rad).unwrap(),
        temp_ext: t,
        rh,
        wind,
    })
}

fn ctx(x_alg_gl: f64, depth: f64) -> ControlContext<'static> {
    ControlContext {
        timeline: Timeline::at(0, 60.0, 0.0),
        obs: Observation {
            ph: 8.0,
            do_pct: 150.0,
            depth,
            x_alg_gl,
            temp: 30.0,
        },
        refs: References::default(),
        env: MeteoSample::default(),
        forecast: Forecast::empty(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn speciation_closes_and_stays_non_negative(dic in 0.0..10.0f64, ph in 4.0..11.0f64, temp in 0.0..50.0f64) {
        let p = plant();
        let (k1, k2, kw) = dissociation_constants(temp, &p.model).unwrap();
        let s = speciate_carbonates(dic, 1000.0 * 10f64.powf(-ph), k1, k2, kw).unwrap();
        prop_assert!(s.co2 >= 0.0 && s.hco3 >= 0.0 && s.co3 >= 0.0 && s.oh > 0.0);
        prop_assert!((s.co2 + s.hco3 + s.co3 - dic).abs() <= 1e-12 * dic);
    }

    #[test]
    fn charge_balance_inverse_round_trips(cat in 0.5..10.0f64, ph in 6.0..10.5f64, temp in 5.0..40.0f64) {
        let p = plant();
        let (k1, k2, kw) = dissociation_constants(temp, &p.model).unwrap();
        let h = 1000.0 * 10f64.powf(-ph);
        let dic = dic_for_proton(cat, h, k1, k2, kw).unwrap();
        let back = equilibrium_proton(dic, cat, k1, k2, kw).unwrap();
        prop_assert!((back / h - 1.0).abs() < 1e-9);
    }

    #[test]
    fn added_base_always_raises_ph(dic in 0.1..10.0f64, ph in 5.0..11.0f64, cat_dot in 1e-8..1e-3f64) {
        let p = plant();
        let (k1, k2, kw) = dissociation_constants(25.0, &p.model).unwrap();
        let hd = proton_derivative(dic, 1.0, 1000.0 * 10f64.powf(-ph), 0.0, cat_dot, k1, k2, kw).unwrap();
        prop_assert!(hd < 0.0);
    }

    #[test]
    fn limitation_factors_are_bounded(
        x in 0.0..3000.0f64,
        ph in 4.0..12.0f64,
        do_sat in 0.0..3.0f64,
        temp in -5.0..55.0f64,
        depth in 0.02..0.4f64,
        rad in 0.0..1500.0f64,
    ) {
        let p = plant();
        let eq = EquilibriumSet::at(temp, &p.model).unwrap();
        let state = StateVector {
            x_alg: x,
            x_o2: do_sat * eq.x_o2_eq,
            dic: 2.0,
            cat: 2.0,
            h: 1000.0 * 10f64.powf(-ph),
            temp,
            vol: p.geom.volume_at_depth(depth),
        };
        let out = compute_outputs(&state, &p.geom, &eq).unwrap();
        let r = biological_rates(&state, par_from_global(rad).unwrap(), &out, &p.model).unwrap();
        for f in [r.mu_i, r.mu_t, r.mu_ph, r.mu_do] {
            prop_assert!((0.0..=1.0).contains(&f));
        }
        prop_assert!(r.p_gross >= 0.0 && r.m_resp > 0.0);
        prop_assert_eq!(r.mu_g, p.model.biological.eta_x * r.p_gross);
    }

    #[test]
    fn heat_flows_add_up(
        m in meteo(),
        temp in 5.0..45.0f64,
        q_w in 0.0..2e-3f64,
        t_in in 20.0..50.0f64,
        q_d in prop::sample::select(vec![0.0, 1e-3]),
        q_h in prop::sample::select(vec![0.0, 1e-3]),
    ) {
        let p = plant();
        let state = StateVector { temp, ..raceway_core::model::nominal_state(&p.geom, &p.model).unwrap() };
        let act = ActuatorInputs { q_w, t_in_hx: t_in, q_d, q_h, ..Default::default() };
        let f = thermal_fluxes(&state, &m, &act, &p.geom, &p.model).unwrap();
        let parts = [f.q_irrad, f.q_rad, f.q_cond, f.q_evap, f.q_conv, f.q_dil, f.q_harv, f.q_mix, f.q_hx];
        let scale: f64 = parts.iter().map(|v| v.abs()).sum();
        prop_assert!((parts.iter().sum::<f64>() - f.q_sum).abs() <= 1e-12 * scale);
        prop_assert!(f.q_evap <= 0.0 && f.m_e_dot >= 0.0);
        // the coil never moves the culture past its inlet temperature
        prop_assert!(f.q_hx * (t_in - temp) >= 0.0);
    }

    #[test]
    fn smooth_window_is_bounded_and_peaks_at_optimum(a in -10.0..10.0f64, w1 in 0.1..20.0f64, w2 in 0.1..20.0f64, r in 0.0..1.0f64) {
        let (b, c) = (a + w1, a + w1 + w2);
        let x = a + r * (c - a);
        let v = smooth_window(x, a, b, c).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(smooth_window(b, a, b, c).unwrap(), 1.0);
    }

    #[test]
    fn hysteresis_switches_at_most_once_on_monotone_input(
        start in 0.0..10.0f64,
        steps in prop::collection::vec(0.0..0.5f64, 1..60),
        rising in any::<bool>(),
        initially_on in any::<bool>(),
    ) {
        let mut h = Hysteresis::new(6.0, 4.0).unwrap();
        h.update(if initially_on { 100.0 } else { -100.0 });
        let mut y = start;
        let mut last = h.update(y);
        let mut toggles = 0;
        for d in steps {
            y += if rising { d } else { -d };
            let now = h.update(y);
            toggles += usize::from(now != last);
            last = now;
        }
        prop_assert!(toggles <= 1);
    }

    #[test]
    fn turbidostat_dilution_monotone_in_biomass(x1 in 0.3..0.7f64, x2 in 0.3..0.7f64, warm in 0.3..0.7f64) {
        let mut base = Turbidostat::new(0.5, 0.15, 0.01).unwrap();
        let mut s = ControlSignals::default();
        base.step(&ctx(warm, 0.15), &mut s).unwrap();
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let (mut a, mut b) = (base.clone(), base);
        let (mut sa, mut sb) = (ControlSignals::default(), ControlSignals::default());
        a.step(&ctx(lo, 0.15), &mut sa).unwrap();
        b.step(&ctx(hi, 0.15), &mut sb).unwrap();
        prop_assert!(sa.q_d_cmd <= sb.q_d_cmd);
    }

    #[test]
    fn actuator_costs_are_scale_free(u in prop::collection::vec(0.0..1.0f64, 2..50), k in 1e-6..1e6f64) {
        let scaled: Vec<f64> = u.iter().map(|v| v * k).collect();
        let (s1, s2) = (cost_smoothness(&u, 0.0, 1.0).unwrap(), cost_smoothness(&scaled, 0.0, k).unwrap());
        let (c1, c2) = (cost_consumption(&u, 1.0).unwrap(), cost_consumption(&scaled, k).unwrap());
        prop_assert!((s1 - s2).abs() <= 1e-9 * s1.max(1e-300));
        prop_assert!((c1 - c2).abs() <= 1e-12 * c1.max(1e-300));
    }

    #[test]
    fn float_text_round_trips(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn scenario_files_round_trip(rows in prop::collection::vec(meteo(), 1..40), period in 1u32..3600) {
        let file = ScenarioFile {
            time_s: (0..rows.len()).map(|i| (i as u32 * period) as f64).collect(),
            samples: rows,
            has_par: true,
        };
        let text = emit_scenario(&file);
        let parsed = parse_scenario(&text).unwrap();
        prop_assert_eq!(&parsed, &file);
        prop_assert_eq!(emit_scenario(&parsed), text);
    }
}
