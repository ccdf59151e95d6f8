//! Economic MPC of the dilution pump by exhaustive enumeration of binary sequences.

use serde::{Deserialize, Serialize};

use super::players::LevelHarvest;
use super::{ControlContext, ControlSignals, Controller, Forecast};
use crate::error::{Error, Result};
use crate::model::{biological_rates, DerivedOutputs, MeteoSample, ModelParameters, ReactorGeometry, StateVector};

/// Process conditions frozen at their setpoints inside the prediction model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinnedConditions {
    pub ph: f64,
    pub do_pct: f64,
    pub depth: f64,
    pub temp: f64,
}

impl Default for PinnedConditions {
    fn default() -> Self {
        PinnedConditions {
            ph: 8.0,
            do_pct: 150.0,
            depth: 0.15,
            temp: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmpcSettings {
    /// Number of decision slots in the horizon.
    pub horizon_slots: usize,
    /// Slot length, also the re-optimisation period [s].
    pub slot_s: f64,
    /// The optimiser runs only while global irradiance exceeds this [W·m⁻²].
    pub rad_threshold: f64,
    /// Terminal lower bound on biomass [g·L⁻¹].
    pub x_min_gl: f64,
    /// Biomass price [currency·g⁻¹].
    pub p_alg: f64,
    /// RK4 step of the prediction model [s].
    pub rk4_step: f64,
    pub pinned: PinnedConditions,
}

impl Default for EmpcSettings {
    fn default() -> Self {
        EmpcSettings {
            horizon_slots: 4,
            slot_s: 900.0,
            rad_threshold: 100.0,
            x_min_gl: 0.5,
            p_alg: 1.0,
            rk4_step: 60.0,
            pinned: PinnedConditions::default(),
        }
    }
}

impl EmpcSettings {
    pub fn validate(&self) -> Result<()> {
        if self.horizon_slots == 0 || self.horizon_slots > 16 {
            return Err(Error::Config(format!(
                "EMPC horizon must have 1..=16 slots, got {}",
                self.horizon_slots
            )));
        }
        if !(self.slot_s > 0.0 && self.rk4_step > 0.0 && self.rk4_step <= self.slot_s) {
            return Err(Error::Config("EMPC needs 0 < rk4_step <= slot_s".into()));
        }
        if !(self.p_alg > 0.0) {
            return Err(Error::Config(format!("p_alg must be positive, got {}", self.p_alg)));
        }
        if !(self.x_min_gl >= 0.0 && self.pinned.depth > 0.0) {
            return Err(Error::Config("EMPC bounds must be non-negative".into()));
        }
        Ok(())
    }
}

/// What the prediction model needs from the plant description.
#[derive(Debug, Clone)]
pub struct PredictorModel {
    pub geom: ReactorGeometry,
    pub params: ModelParameters,
    /// Dilution flow when a slot bit is set [m³·s⁻¹].
    pub pump_rate: f64,
}

impl PredictorModel {
    /// Net specific rate `μ_g − m` [s⁻¹] at biomass `x` [g·m⁻³] under the pinned conditions.
    fn net_rate(&self, x: f64, par: f64, pinned: &PinnedConditions) -> Result<f64> {
        let state = StateVector {
            x_alg: x.max(0.0),
            x_o2: 0.0,
            dic: 0.0,
            cat: 0.0,
            h: 1.0,
            temp: pinned.temp,
            vol: self.geom.volume_at_depth(pinned.depth),
        };
        let outputs = DerivedOutputs {
            ph: pinned.ph,
            do_pct: pinned.do_pct,
            x_alg_gl: x / 1000.0,
            depth: pinned.depth,
        };
        let r = biological_rates(&state, par, &outputs, &self.params)?;
        Ok(r.mu_g - r.m_resp)
    }
}

/// Biomass [g·L⁻¹] at the slot boundaries for one dilution sequence.
///
/// Slot `k` starts at `t0 + k·slot_s`; irradiance is taken from the forecast by
/// sample-and-hold, with `env` in force before the first forecast sample.
#[allow(clippy::too_many_arguments)]
pub fn predict_biomass(
    x0_gl: f64,
    t0: f64,
    env: &MeteoSample,
    forecast: &Forecast<'_>,
    dilution: &[bool],
    settings: &EmpcSettings,
    model: &PredictorModel,
) -> Result<Vec<f64>> {
    let vol = model.geom.volume_at_depth(settings.pinned.depth);
    let n_sub = (settings.slot_s / settings.rk4_step).round().max(1.0) as usize;
    let h = settings.slot_s / n_sub as f64;
    let mut x = x0_gl * 1000.0;
    let mut traj = Vec::with_capacity(dilution.len() + 1);
    traj.push(x0_gl);
    for (k, &on) in dilution.iter().enumerate() {
        let d = if on { model.pump_rate / vol } else { 0.0 };
        for j in 0..n_sub {
            let t = t0 + k as f64 * settings.slot_s + j as f64 * h;
            let par = forecast.sample_at(t, env).rad_par;
            let f = |x: f64| -> Result<f64> { Ok((model.net_rate(x, par, &settings.pinned)? - d) * x) };
            let k1 = f(x)?;
            let k2 = f(x + 0.5 * h * k1)?;
            let k3 = f(x + 0.5 * h * k2)?;
            let k4 = f(x + h * k3)?;
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        traj.push(x / 1000.0);
    }
    Ok(traj)
}

/// Result of one optimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpcPlan {
    /// Slots actually used after horizon truncation.
    pub n_slots: usize,
    /// Index of the chosen sequence (bit `k` is slot `k`), `None` if all were infeasible.
    pub best_index: Option<usize>,
    pub sequence: Vec<bool>,
    /// `J = −P_alg·Σ x(k)·q_d(k)·Δt` of the chosen sequence.
    pub cost: f64,
}

impl EmpcPlan {
    pub fn first_action(&self) -> bool {
        self.sequence.first().copied().unwrap_or(false)
    }
}

pub fn sequence_from_index(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|k| (index >> k) & 1 == 1).collect()
}

/// Slots that fit before the forecast ends or irradiance falls to the threshold.
fn horizon_slots(t0: f64, forecast: &Forecast<'_>, settings: &EmpcSettings) -> usize {
    let window_end = forecast
        .times
        .iter()
        .zip(forecast.samples)
        .find(|(_, s)| s.rad_global <= settings.rad_threshold)
        .map(|(t, _)| *t)
        .or_else(|| {
            let n = forecast.times.len();
            match n {
                0 => None,
                1 => Some(forecast.times[0]),
                _ => Some(2.0 * forecast.times[n - 1] - forecast.times[n - 2]),
            }
        });
    match window_end {
        None => 0,
        Some(end) => {
            let slots = ((end - t0) / settings.slot_s).ceil();
            (slots.max(1.0) as usize).min(settings.horizon_slots)
        }
    }
}

/// Enumerates every binary dilution sequence over the (possibly shrunk) horizon.
///
/// Sequences whose terminal biomass falls below `x_min_gl` are discarded; ties go to
/// the lowest index. The ranking uses the unscaled harvest so it cannot depend on `p_alg`.
pub fn solve_empc(
    x0_gl: f64,
    t0: f64,
    env: &MeteoSample,
    forecast: &Forecast<'_>,
    settings: &EmpcSettings,
    model: &PredictorModel,
) -> Result<EmpcPlan> {
    let n = horizon_slots(t0, forecast, settings);
    let mut best: Option<(usize, f64)> = None;
    for index in 0..(1usize << n) {
        let seq = sequence_from_index(index, n);
        let traj = predict_biomass(x0_gl, t0, env, forecast, &seq, settings, model)?;
        if traj[n] < settings.x_min_gl {
            continue;
        }
        let harvest: f64 = seq
            .iter()
            .zip(&traj)
            .filter(|(on, _)| **on)
            .map(|(_, x)| x * 1000.0 * model.pump_rate * settings.slot_s)
            .sum();
        let score = -harvest;
        if best.is_none_or(|(_, b)| score < b) {
            best = Some((index, score));
        }
    }
    Ok(match best {
        Some((index, score)) => EmpcPlan {
            n_slots: n,
            best_index: Some(index),
            sequence: sequence_from_index(index, n),
            cost: settings.p_alg * score,
        },
        None => EmpcPlan {
            n_slots: n,
            best_index: None,
            sequence: vec![false; n],
            cost: 0.0,
        },
    })
}

/// EMPC dilution with level-controlled harvest.
#[derive(Debug, Clone)]
pub struct Empc {
    settings: EmpcSettings,
    model: PredictorModel,
    level: LevelHarvest,
    last_solve: Option<f64>,
    action: bool,
    last_plan: Option<EmpcPlan>,
}

impl Empc {
    pub fn new(settings: EmpcSettings, model: PredictorModel, level: LevelHarvest) -> Result<Self> {
        settings.validate()?;
        Ok(Empc {
            settings,
            model,
            level,
            last_solve: None,
            action: false,
            last_plan: None,
        })
    }

    pub fn last_plan(&self) -> Option<&EmpcPlan> {
        self.last_plan.as_ref()
    }
}

impl Controller for Empc {
    fn name(&self) -> &str {
        "hd-empc"
    }

    fn step(&mut self, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> Result<()> {
        let t = ctx.timeline.time;
        if ctx.env.rad_global > self.settings.rad_threshold {
            let due = self
                .last_solve
                .is_none_or(|t_last| t - t_last >= self.settings.slot_s - 1e-9);
            if due {
                let plan = solve_empc(
                    ctx.obs.x_alg_gl,
                    t,
                    &ctx.env,
                    &ctx.forecast,
                    &self.settings,
                    &self.model,
                )?;
                self.action = plan.first_action();
                self.last_plan = Some(plan);
                self.last_solve = Some(t);
            }
        } else {
            self.action = false;
            self.last_solve = None;
        }
        s.q_d_cmd = f64::from(u8::from(self.action));
        s.q_h_cmd = self.level.command(ctx.obs.depth);
        Ok(())
    }
}
