//! Model quantities checked against independent evaluations.

mod common;

use std::f64::consts::PI;

use common::{plant, rel_err};
use raceway_core::control::{predict_biomass, EmpcSettings, Forecast, PredictorModel};
use raceway_core::integrator::{integrate_macro_step, IntegratorConfig};
use raceway_core::model::{
    dissociation_constants, evaluate_plant, henry_equilibria, nominal_state, par_from_global, speciate_carbonates,
    ActuatorInputs, EquilibriumSet, MeteoSample, StateVector,
};
use twofloat::TwoFloat;

fn tf(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// `exp` in double-double: halve the argument eight times, sum the series, square back.
/// (twofloat's own `exp` is only good to about 1e-13 on parts of this range.)
fn dd_exp(x: TwoFloat) -> TwoFloat {
    let y = x / 256.0;
    let (mut term, mut sum) = (tf(1.0), tf(1.0));
    for k in 1..30 {
        term = term * y / f64::from(k);
        sum += term;
    }
    for _ in 0..8 {
        sum = sum * sum;
    }
    sum
}

fn close_tf(value: f64, oracle: TwoFloat, tol: f64) -> bool {
    let o = f64::from(oracle);
    ((tf(value) - oracle) / oracle).abs() <= tol || value == o
}

#[test]
fn dissociation_constants_at_15c_match_double_double() {
    let p = plant();
    let e = &p.model.engineering;
    let (k1, k2, kw) = dissociation_constants(15.0, &p.model).unwrap();
    let inv = tf(1.0) / (tf(15.0) + 273.15) - tf(1.0) / tf(e.t_ref);
    let vh = |k_ref: TwoFloat, dh: f64| k_ref * dd_exp(-(tf(dh) / e.r_gas) * inv);
    let k1_o = vh(tf(e.k1_ref) * 1000.0, e.dh_k1);
    let k2_o = vh(tf(e.k2_ref) * 1000.0, e.dh_k2);
    let kw_o = vh(tf(e.kw_ref) * 1.0e6, e.dh_kw);
    assert!(close_tf(k1, k1_o, 1e-14), "k1 {k1} vs {k1_o:?}");
    assert!(close_tf(k2, k2_o, 1e-14), "k2 {k2} vs {k2_o:?}");
    assert!(close_tf(kw, kw_o, 1e-14), "kw {kw} vs {kw_o:?}");
}

#[test]
fn oxygen_saturation_at_30c_matches_double_double() {
    let p = plant();
    let e = &p.model.engineering;
    let (kh_o2, kh_co2, x_o2_eq, co2_eq, co2_iny) = henry_equilibria(30.0, &p.model).unwrap();
    let inv = tf(1.0) / (tf(30.0) + 273.15) - tf(1.0) / tf(e.t_ref);
    let kh_o2_o = tf(e.kh_ref_o2) * dd_exp(inv * e.c_o2);
    let kh_co2_o = tf(e.kh_ref_co2) * dd_exp(inv * e.c_co2);
    assert!(close_tf(kh_o2, kh_o2_o, 1e-14));
    assert!(close_tf(kh_co2, kh_co2_o, 1e-14));
    assert!(close_tf(x_o2_eq, kh_o2_o * e.p_atm * e.y_o2, 1e-14));
    assert!(close_tf(co2_eq, kh_co2_o * e.p_atm * e.y_co2, 1e-14));
    assert!(close_tf(co2_iny, kh_co2_o * e.p_atm * e.y_pure_co2, 1e-14));
}

#[test]
fn speciation_matches_direct_double_double_evaluation() {
    let p = plant();
    let (k1, k2, kw) = dissociation_constants(25.0, &p.model).unwrap();
    let (dic, h) = (2.0, 1e-5);
    let s = speciate_carbonates(dic, h, k1, k2, kw).unwrap();
    let (th, tk1, tk2) = (tf(h), tf(k1), tf(k2));
    let delta = th * th + th * tk1 + tk1 * tk2;
    let co2 = tf(dic) * th * th / delta;
    let hco3 = tf(dic) * th * tk1 / delta;
    let co3 = tf(dic) * tk1 * tk2 / delta;
    assert!(close_tf(s.co2, co2, 1e-14));
    assert!(close_tf(s.hco3, hco3, 1e-14));
    assert!(close_tf(s.co3, co3, 1e-14));
    assert!(close_tf(s.oh, tf(kw) / th, 1e-15));
    assert!(rel_err(s.co2 + s.hco3 + s.co3, dic) < 1e-12);
}

fn window(x: f64, a: f64, b: f64, c: f64) -> f64 {
    if x <= a || x >= c {
        return 0.0;
    }
    let r = if x <= b { (x - a) / (b - a) } else { (c - x) / (c - b) };
    3.0 * r * r - 2.0 * r * r * r
}

/// Straight-line transcription of the plant equations, written without the crate's helpers.
fn transcribed_derivative(s: &StateVector, m: &MeteoSample, a: &ActuatorInputs, p: &common::Plant) -> [f64; 7] {
    let g = &p.geom;
    let th = &p.model.thermal;
    let bi = &p.model.biological;
    let e = &p.model.engineering;

    let t_k = s.temp + 273.15;
    let arr = |dh: f64| (-dh / e.r_gas * (1.0 / t_k - 1.0 / e.t_ref)).exp();
    let k1 = e.k1_ref * 1e3 * arr(e.dh_k1);
    let k2 = e.k2_ref * 1e3 * arr(e.dh_k2);
    let kw = e.kw_ref * 1e6 * arr(e.dh_kw);
    let kh_o2 = e.kh_ref_o2 * (e.c_o2 * (1.0 / t_k - 1.0 / e.t_ref)).exp();
    let kh_co2 = e.kh_ref_co2 * (e.c_co2 * (1.0 / t_k - 1.0 / e.t_ref)).exp();
    let o2_sat = kh_o2 * e.p_atm * e.y_o2;
    let co2_sat = kh_co2 * e.p_atm * e.y_co2;
    let co2_inj = kh_co2 * e.p_atm * e.y_pure_co2;

    let area = g.width * g.length;
    let a_sump = PI * g.sump_radius.powi(2);
    let depth = (s.vol - a_sump * g.sump_height) / area;
    let ph = -(s.h * 1e-3).log10();
    let do_pct = 100.0 * s.x_o2 / o2_sat;

    // growth
    let z = bi.light_extinction * depth * s.x_alg;
    let i_av = m.rad_par * (1.0 - (-z).exp()) / z;
    let mu_i = i_av.powf(bi.light_exponent) / (bi.i_k.powf(bi.light_exponent) + i_av.powf(bi.light_exponent));
    let mu_t = window(s.temp, bi.temp_min, bi.temp_opt, bi.temp_max);
    let mu_ph = window(ph, bi.ph_min, bi.ph_opt, bi.ph_max);
    let mu_do = (1.0 - (do_pct / bi.do_max).powf(bi.do_exponent)).clamp(0.0, 1.0);
    let pg = bi.mu_max * mu_i * mu_t * mu_ph * mu_do;
    let resp = bi.m_min * (1.0 + bi.k_resp_light * (1.0 - mu_i)) * bi.q10.powf((s.temp - 20.0) / 10.0);

    // heat
    let rho_cp = th.water_density * th.water_heat_capacity;
    let magnus = |t: f64| 611.2 * (17.62 * t / (243.12 + t)).exp();
    let t_air = m.temp_ext + 273.15;
    let e_sky = (0.70 + 5.95e-5 * (m.rh / 100.0 * magnus(m.temp_ext) / 100.0) * (1500.0 / t_air).exp()).min(1.0);
    let t_sky = e_sky.powf(0.25) * t_air;
    let q_irrad = th.alpha_rad * area * m.rad_global;
    let q_rad = th.stefan_boltzmann * th.emissivity_water * area * (t_sky.powi(4) - t_k.powi(4));
    let u_cond = 1.0 / (th.liner_thickness / th.liner_conductivity + th.ground_thickness / th.ground_conductivity);
    let q_cond = u_cond * area * (th.ground_temp - s.temp);
    let vap = |t: f64, rh: f64| rh / 100.0 * magnus(t) * 0.018015 / (e.r_gas * (t + 273.15));
    let k_m = th.evap_mass_transfer * (1.0 + th.evap_wind_coeff * m.wind);
    let m_evap = (k_m * area * (vap(s.temp, 100.0) - vap(m.temp_ext, m.rh))).max(0.0);
    let q_evap = -(2.501e6 - 2361.0 * s.temp) * m_evap;
    let q_conv = th.convection_coeff * area * (m.temp_ext - s.temp);
    let q_dil = rho_cp * a.q_d * m.temp_ext;
    let q_harv = -rho_cp * a.q_h * s.temp;
    let c_w = rho_cp * a.q_w;
    let q_hx = c_w * (a.t_in_hx - s.temp) * (1.0 - (-th.hx_ua / c_w).exp());
    let q_total = q_irrad + q_rad + q_cond + q_evap + q_conv + q_dil + q_harv + th.mixing_power + q_hx;

    // gas transfer
    let kla_c = e.alpha_co2 * (a.q_co2 / a_sump).powf(e.beta_co2) * a_sump / s.vol;
    let kla_o = e.alpha_o2 * (a.q_air / a_sump).powf(e.beta_o2) * a_sump / s.vol;
    let pw = g.width * g.paddlewheel_length * depth / s.vol;

    let den = s.h * s.h + s.h * k1 + k1 * k2;
    let co2 = s.dic * s.h * s.h / den;

    let d = a.q_d / s.vol;
    let v_dot = a.q_d - a.q_h - m_evap / th.water_density;
    let x_dot = (bi.eta_x * pg - resp) * s.x_alg - d * s.x_alg;
    let c_mol = s.x_alg * e.yield_co2 / e.molar_mass_co2;
    let dic_dot = d * (e.dic_in - s.dic)
        + (resp - pg) * c_mol
        + kla_c * (co2_inj - co2)
        + (e.k_atm_co2 + e.k_pw_co2 * pw + e.k_strip_co2_by_o2 * kla_o) * (co2_sat - co2);
    let cat_dot = d * (e.cat_in - s.cat);
    let o_mol = s.x_alg * e.yield_o2 / e.molar_mass_o2;
    let o2_dot = (pg - resp) * o_mol + (d + kla_o + e.k_atm_o2 + e.k_pw_o2 * pw) * (o2_sat - s.x_o2)
        - e.k_strip_o2_by_co2 * kla_c * s.x_o2;

    // implicit differentiation of the charge balance
    let frac1 = s.h * k1 / den;
    let frac2 = k1 * k2 / den;
    let d_frac1 = (k1 * den - s.h * k1 * (2.0 * s.h + k1)) / (den * den);
    let d_frac2 = -k1 * k2 * (2.0 * s.h + k1) / (den * den);
    let f_h = 1.0 - s.dic * (d_frac1 + 2.0 * d_frac2) + kw / (s.h * s.h);
    let h_dot = ((frac1 + 2.0 * frac2) * dic_dot - cat_dot) / f_h;

    let t_dot = q_total / (rho_cp * s.vol) - s.temp * v_dot / s.vol;
    [x_dot, o2_dot, dic_dot, cat_dot, h_dot, t_dot, v_dot]
}

#[test]
fn nominal_derivative_matches_dual_transcription() {
    let p = plant();
    let base = nominal_state(&p.geom, &p.model).unwrap();
    let meteo = MeteoSample {
        rad_global: 820.0,
        rad_par: par_from_global(820.0).unwrap(),
        temp_ext: 24.0,
        rh: 55.0,
        wind: 2.5,
    };
    let act = ActuatorInputs {
        q_co2: 1.5e-4,
        q_air: 4.0e-3,
        q_d: 1.0e-3,
        q_h: 4.0e-4,
        q_w: 1.2e-3,
        t_in_hx: 42.0,
    };
    // move DO, temperature and cations off their rest values so every term is active
    let state = StateVector {
        x_o2: base.x_o2 * 1.4,
        temp: 27.5,
        cat: base.cat * 0.9,
        ..base
    };
    let d = evaluate_plant(&state, &meteo, &act, &p.geom, &p.model)
        .unwrap()
        .derivative;
    let oracle = transcribed_derivative(&state, &meteo, &act, &p);
    for (i, (got, want)) in d.to_array().iter().zip(oracle).enumerate() {
        assert!(
            rel_err(*got, want) < 1e-10,
            "{}: {got} vs {want}",
            StateVector::NAMES[i]
        );
        assert!(want != 0.0, "{} is inactive in this test point", StateVector::NAMES[i]);
    }
}

#[test]
fn macro_step_matches_tightened_reference() {
    let p = plant();
    let state = nominal_state(&p.geom, &p.model).unwrap();
    let meteo = MeteoSample {
        rad_global: 900.0,
        rad_par: par_from_global(900.0).unwrap(),
        temp_ext: 26.0,
        rh: 50.0,
        wind: 2.0,
    };
    let act = ActuatorInputs {
        q_co2: 2.0e-4,
        q_air: 2.0e-3,
        q_w: 1.0e-3,
        t_in_hx: 40.0,
        ..Default::default()
    };
    let cfg = IntegratorConfig::default();
    let y = integrate_macro_step(&state, &meteo, &act, &p.geom, &p.model, 60.0, &cfg).unwrap();
    let reference = integrate_macro_step(&state, &meteo, &act, &p.geom, &p.model, 60.0, &cfg.scaled(0.01)).unwrap();
    let atol = cfg.abs_tol();
    let pairs = y.to_array().into_iter().zip(reference.to_array());
    for (i, ((a, b), tol)) in pairs.zip(atol).enumerate() {
        let scale = tol / cfg.rel_tol + b.abs();
        assert!(
            (a - b).abs() <= 10.0 * cfg.rel_tol * scale,
            "{}: {a} vs {b}",
            StateVector::NAMES[i]
        );
    }
}

#[test]
fn empc_predictor_matches_fine_step_reference() {
    let p = plant();
    let settings = EmpcSettings::default();
    let model = PredictorModel {
        geom: p.geom,
        params: p.model.clone(),
        pump_rate: 1.0e-3,
    };
    let sunny = |rad: f64| MeteoSample {
        rad_global: rad,
        rad_par: par_from_global(rad).unwrap(),
        temp_ext: 25.0,
        rh: 50.0,
        wind: 2.0,
    };
    let times: Vec<f64> = (1..=60).map(|k| 60.0 * k as f64).collect();
    let samples: Vec<MeteoSample> = times.iter().map(|t| sunny(900.0 - 0.05 * t)).collect();
    let forecast = Forecast::new(&times, &samples);
    let env = sunny(900.0);
    let seq = [true, false, true, true];
    let traj = predict_biomass(0.5, 0.0, &env, &forecast, &seq, &settings, &model).unwrap();

    let fine = EmpcSettings {
        rk4_step: 1.0,
        ..settings.clone()
    };
    let reference = predict_biomass(0.5, 0.0, &env, &forecast, &seq, &fine, &model).unwrap();
    for (a, b) in traj.iter().zip(&reference) {
        assert!(rel_err(*a, *b) < 5e-3, "{a} vs {b}");
    }
    // and the dilution really lowers biomass compared with a closed pond
    let closed = predict_biomass(0.5, 0.0, &env, &forecast, &[false; 4], &settings, &model).unwrap();
    assert!(closed[4] > traj[4]);
}

#[test]
fn equilibria_monotone_in_temperature() {
    let p = plant();
    let cold = EquilibriumSet::at(10.0, &p.model).unwrap();
    let warm = EquilibriumSet::at(35.0, &p.model).unwrap();
    assert!(warm.k1 > cold.k1 && warm.k2 > cold.k2 && warm.kw > cold.kw);
    assert!(warm.x_o2_eq < cold.x_o2_eq && warm.co2_eq < cold.co2_eq);
}
