//! The closed loop: outputs, controllers, saturation, gas delay, integration, logging.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::control::{ControlContext, ControlSignals, ControllerSet, Forecast, Observation, References, Timeline};
use crate::error::{Error, Result};
use crate::integrator::{IntegratorConfig, PlantIntegrator};
use crate::model::{
    compute_outputs, evaluate_plant, ActuatorInputs, EquilibriumSet, MeteoSample, ModelParameters, ReactorGeometry,
    StateVector,
};

/// Physical limits of the actuators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActuatorLimits {
    /// [m³·s⁻¹]
    pub q_co2_max: f64,
    /// [m³·s⁻¹]
    pub q_air_max: f64,
    /// [m³·s⁻¹]
    pub q_w_max: f64,
    /// Inlet temperature range of the heat exchanger [°C].
    pub t_in_min: f64,
    pub t_in_max: f64,
    /// Flow of the dilution and harvest pumps when commanded on [m³·s⁻¹].
    pub pump_rate: f64,
}

impl Default for ActuatorLimits {
    fn default() -> Self {
        ActuatorLimits {
            q_co2_max: 20.0 / 60_000.0,
            q_air_max: 500.0 / 60_000.0,
            q_w_max: 2.0e-3,
            t_in_min: 20.0,
            t_in_max: 50.0,
            pump_rate: 1.0e-3,
        }
    }
}

impl ActuatorLimits {
    pub fn validate(&self) -> Result<()> {
        let maxima = [self.q_co2_max, self.q_air_max, self.q_w_max, self.pump_rate];
        if maxima.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::Config(format!("actuator maxima must be positive: {self:?}")));
        }
        if !(self.t_in_min <= self.t_in_max) {
            return Err(Error::Config("t_in_min must not exceed t_in_max".into()));
        }
        Ok(())
    }
}

/// Loop settings that are not part of the plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Control and integration macro-step [s].
    pub t_m: f64,
    /// Transport delay of both gas lines [s]; must be a multiple of `t_m`.
    pub gas_delay: f64,
    pub refs: References,
    pub integrator: IntegratorConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t_m: 60.0,
            gas_delay: 300.0,
            refs: References::default(),
            integrator: IntegratorConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn delay_steps(&self) -> Result<usize> {
        let n = self.gas_delay / self.t_m;
        if !(n >= 0.0) || (n - n.round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "gas delay {} s is not a multiple of T_m = {} s",
                self.gas_delay, self.t_m
            )));
        }
        Ok(n.round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_m > 0.0) {
            return Err(Error::Config(format!("T_m must be positive, got {}", self.t_m)));
        }
        self.delay_steps()?;
        self.integrator.validate(self.t_m)
    }
}

/// Disturbance series and initial state of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Sample period of `samples` [s].
    pub period: f64,
    /// Seconds after midnight at which the run starts.
    pub day_offset: f64,
    pub samples: Vec<MeteoSample>,
    pub initial: StateVector,
    /// Simulated duration [s].
    pub horizon: f64,
}

impl Scenario {
    pub fn validate(&self, t_m: f64) -> Result<()> {
        if !(self.period > 0.0) {
            return Err(Error::Scenario(format!(
                "sample period must be positive, got {}",
                self.period
            )));
        }
        if !(self.horizon >= 0.0) {
            return Err(Error::Scenario(format!(
                "horizon must be non-negative, got {}",
                self.horizon
            )));
        }
        let steps = self.horizon / t_m;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::Scenario(format!(
                "horizon {} s is not a multiple of T_m = {t_m} s",
                self.horizon
            )));
        }
        if self.samples.len() as f64 * self.period < self.horizon {
            return Err(Error::Scenario(format!(
                "{} samples at {} s cover less than the {} s horizon",
                self.samples.len(),
                self.period,
                self.horizon
            )));
        }
        for (i, s) in self.samples.iter().enumerate() {
            s.validate().map_err(|e| Error::Scenario(format!("sample {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn n_steps(&self, t_m: f64) -> usize {
        (self.horizon / t_m).round() as usize
    }

    /// Meteorology held from the latest scenario sample at each loop step.
    pub fn step_meteo(&self, t_m: f64) -> Vec<MeteoSample> {
        (0..self.n_steps(t_m))
            .map(|k| {
                let j = ((k as f64 * t_m) / self.period + 1e-9).floor() as usize;
                self.samples[j.min(self.samples.len() - 1)]
            })
            .collect()
    }
}

/// Fixed-length FIFO delaying the (air, CO2) commands.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayBuffer {
    queue: VecDeque<(f64, f64)>,
}

impl DelayBuffer {
    pub fn new(len: usize) -> Self {
        DelayBuffer {
            queue: std::iter::repeat_n((0.0, 0.0), len).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Pushes this step's command and returns the one delivered now.
    pub fn push_pop(&mut self, cmd: (f64, f64)) -> (f64, f64) {
        if self.queue.is_empty() {
            return cmd;
        }
        self.queue.push_back(cmd);
        self.queue.pop_front().expect("queue is non-empty")
    }

    /// Flows still in transit, in push order.
    pub fn residue(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.queue.iter()
    }
}

/// Clamp commands to the actuator limits and convert pump bits to flows.
pub fn saturate_and_map(s: &ControlSignals, limits: &ActuatorLimits) -> ActuatorInputs {
    ActuatorInputs {
        q_co2: s.q_co2.clamp(0.0, limits.q_co2_max),
        q_air: s.q_air.clamp(0.0, limits.q_air_max),
        q_d: limits.pump_rate * s.q_d_cmd,
        q_h: limits.pump_rate * s.q_h_cmd,
        q_w: s.q_w.clamp(0.0, limits.q_w_max),
        t_in_hx: s.t_in_hx.clamp(limits.t_in_min, limits.t_in_max),
    }
}

/// Perfect preview from step `index + 1` to the end of the run.
pub fn build_forecast<'a>(times: &'a [f64], meteo: &'a [MeteoSample], index: usize) -> Forecast<'a> {
    let start = (index + 1).min(times.len());
    Forecast::new(&times[start..], &meteo[start..])
}

/// Everything logged at one loop step; states are those at the start of the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub time: f64,
    pub ph_ref: f64,
    pub do_ref: f64,
    pub temp_ref: f64,
    pub ph: f64,
    pub do_pct: f64,
    pub temp: f64,
    pub x_alg_gl: f64,
    pub depth: f64,
    pub x_alg: f64,
    pub x_o2: f64,
    pub dic: f64,
    pub cat: f64,
    pub h: f64,
    pub vol: f64,
    pub co2: f64,
    pub hco3: f64,
    pub co3: f64,
    pub rad_global: f64,
    pub rad_par: f64,
    pub temp_ext: f64,
    pub rh: f64,
    pub wind: f64,
    /// Saturated commands before the transport delay [m³·s⁻¹].
    pub q_co2_cmd: f64,
    pub q_air_cmd: f64,
    /// Flows reaching the sump [m³·s⁻¹].
    pub q_co2: f64,
    pub q_air: f64,
    pub q_d_cmd: f64,
    pub q_h_cmd: f64,
    pub q_d: f64,
    pub q_h: f64,
    pub cum_air_l: f64,
    pub cum_co2_l: f64,
    pub cum_harv_g: f64,
    pub mu_i: f64,
    pub mu_t: f64,
    pub mu_ph: f64,
    pub mu_do: f64,
    pub i_av: f64,
    pub p_gross: f64,
    pub mu_g: f64,
    pub m_resp: f64,
    pub q_w: f64,
    pub t_in_hx: f64,
    pub t_out_hx: f64,
    pub hx_ua: f64,
    pub q_hx: f64,
    pub q_w_max: f64,
    pub t_in_min: f64,
    pub t_in_max: f64,
}

impl StepRecord {
    /// Column names, in the order of [`StepRecord::values`].
    pub const FIELDS: [&'static str; 50] = [
        "time",
        "ph_ref",
        "do_ref",
        "temp_ref",
        "ph",
        "do_pct",
        "temp",
        "x_alg_gl",
        "depth",
        "x_alg",
        "x_o2",
        "dic",
        "cat",
        "h",
        "vol",
        "co2",
        "hco3",
        "co3",
        "rad_global",
        "rad_par",
        "temp_ext",
        "rh",
        "wind",
        "q_co2_cmd",
        "q_air_cmd",
        "q_co2",
        "q_air",
        "q_d_cmd",
        "q_h_cmd",
        "q_d",
        "q_h",
        "cum_air_l",
        "cum_co2_l",
        "cum_harv_g",
        "mu_i",
        "mu_t",
        "mu_ph",
        "mu_do",
        "i_av",
        "p_gross",
        "mu_g",
        "m_resp",
        "q_w",
        "t_in_hx",
        "t_out_hx",
        "hx_ua",
        "q_hx",
        "q_w_max",
        "t_in_min",
        "t_in_max",
    ];

    pub fn values(&self) -> [f64; 50] {
        [
            self.time,
            self.ph_ref,
            self.do_ref,
            self.temp_ref,
            self.ph,
            self.do_pct,
            self.temp,
            self.x_alg_gl,
            self.depth,
            self.x_alg,
            self.x_o2,
            self.dic,
            self.cat,
            self.h,
            self.vol,
            self.co2,
            self.hco3,
            self.co3,
            self.rad_global,
            self.rad_par,
            self.temp_ext,
            self.rh,
            self.wind,
            self.q_co2_cmd,
            self.q_air_cmd,
            self.q_co2,
            self.q_air,
            self.q_d_cmd,
            self.q_h_cmd,
            self.q_d,
            self.q_h,
            self.cum_air_l,
            self.cum_co2_l,
            self.cum_harv_g,
            self.mu_i,
            self.mu_t,
            self.mu_ph,
            self.mu_do,
            self.i_av,
            self.p_gross,
            self.mu_g,
            self.m_resp,
            self.q_w,
            self.t_in_hx,
            self.t_out_hx,
            self.hx_ua,
            self.q_hx,
            self.q_w_max,
            self.t_in_min,
            self.t_in_max,
        ]
    }

    pub fn from_values(v: &[f64]) -> Result<Self> {
        if v.len() != Self::FIELDS.len() {
            return Err(Error::Evaluation(format!(
                "expected {} fields per record, got {}",
                Self::FIELDS.len(),
                v.len()
            )));
        }
        Ok(StepRecord {
            time: v[0],
            ph_ref: v[1],
            do_ref: v[2],
            temp_ref: v[3],
            ph: v[4],
            do_pct: v[5],
            temp: v[6],
            x_alg_gl: v[7],
            depth: v[8],
            x_alg: v[9],
            x_o2: v[10],
            dic: v[11],
            cat: v[12],
            h: v[13],
            vol: v[14],
            co2: v[15],
            hco3: v[16],
            co3: v[17],
            rad_global: v[18],
            rad_par: v[19],
            temp_ext: v[20],
            rh: v[21],
            wind: v[22],
            q_co2_cmd: v[23],
            q_air_cmd: v[24],
            q_co2: v[25],
            q_air: v[26],
            q_d_cmd: v[27],
            q_h_cmd: v[28],
            q_d: v[29],
            q_h: v[30],
            cum_air_l: v[31],
            cum_co2_l: v[32],
            cum_harv_g: v[33],
            mu_i: v[34],
            mu_t: v[35],
            mu_ph: v[36],
            mu_do: v[37],
            i_av: v[38],
            p_gross: v[39],
            mu_g: v[40],
            m_resp: v[41],
            q_w: v[42],
            t_in_hx: v[43],
            t_out_hx: v[44],
            hx_ua: v[45],
            q_hx: v[46],
            q_w_max: v[47],
            t_in_min: v[48],
            t_in_max: v[49],
        })
    }
}

/// Complete trajectory of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsLog {
    pub t_m: f64,
    pub limits: ActuatorLimits,
    pub controllers: [String; 4],
    pub records: Vec<StepRecord>,
    pub initial_state: StateVector,
    pub final_state: StateVector,
    /// Gas commands still in the delay line at the end, as (air, CO2) [m³·s⁻¹].
    pub delay_residue: Vec<(f64, f64)>,
}

impl ResultsLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn series(&self, f: impl Fn(&StepRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    pub fn horizon(&self) -> f64 {
        self.records.len() as f64 * self.t_m
    }
}

fn observation(state: &StateVector, geom: &ReactorGeometry, params: &ModelParameters) -> Result<Observation> {
    let eq = EquilibriumSet::at(state.temp, params)?;
    let out = compute_outputs(state, geom, &eq)?;
    Ok(Observation {
        ph: out.ph,
        do_pct: out.do_pct,
        depth: out.depth,
        x_alg_gl: out.x_alg_gl,
        temp: state.temp,
    })
}

/// Runs the closed loop over the scenario horizon.
pub fn run_simulation(
    scenario: &Scenario,
    controllers: &mut ControllerSet,
    limits: &ActuatorLimits,
    cfg: &SimConfig,
    params: &ModelParameters,
    geom: &ReactorGeometry,
) -> Result<ResultsLog> {
    cfg.validate()?;
    limits.validate()?;
    geom.validate()?;
    params.validate()?;
    scenario.validate(cfg.t_m)?;
    scenario.initial.validate(geom.sump_volume())?;

    let t_m = cfg.t_m;
    let n = scenario.n_steps(t_m);
    let meteo = scenario.step_meteo(t_m);
    let times: Vec<f64> = (0..n).map(|k| k as f64 * t_m).collect();

    let mut integrator = PlantIntegrator::new(cfg.integrator.clone());
    let mut delay = DelayBuffer::new(cfg.delay_steps()?);
    let mut signals = ControlSignals::default();
    let mut state = scenario.initial;
    let mut records = Vec::with_capacity(n);
    let (mut cum_air, mut cum_co2, mut cum_harv) = (0.0, 0.0, 0.0);

    for k in 0..n {
        let env = meteo[k];
        let obs = observation(&state, geom, params)?;
        let ctx = ControlContext {
            timeline: Timeline::at(k, t_m, scenario.day_offset),
            obs,
            refs: cfg.refs,
            env,
            forecast: build_forecast(&times, &meteo, k),
        };
        controllers.step(&ctx, &mut signals)?;

        let commanded = saturate_and_map(&signals, limits);
        let (q_air, q_co2) = delay.push_pop((commanded.q_air, commanded.q_co2));
        let act = ActuatorInputs {
            q_air,
            q_co2,
            ..commanded
        };

        let snap = evaluate_plant(&state, &env, &act, geom, params)?;
        cum_air += act.q_air * t_m * 1000.0;
        cum_co2 += act.q_co2 * t_m * 1000.0;
        cum_harv += state.x_alg * act.q_h * t_m;

        records.push(StepRecord {
            time: times[k],
            ph_ref: cfg.refs.ph_ref,
            do_ref: cfg.refs.do_ref,
            temp_ref: cfg.refs.temp_ref,
            ph: obs.ph,
            do_pct: obs.do_pct,
            temp: state.temp,
            x_alg_gl: obs.x_alg_gl,
            depth: obs.depth,
            x_alg: state.x_alg,
            x_o2: state.x_o2,
            dic: state.dic,
            cat: state.cat,
            h: state.h,
            vol: state.vol,
            co2: snap.speciation.co2,
            hco3: snap.speciation.hco3,
            co3: snap.speciation.co3,
            rad_global: env.rad_global,
            rad_par: env.rad_par,
            temp_ext: env.temp_ext,
            rh: env.rh,
            wind: env.wind,
            q_co2_cmd: commanded.q_co2,
            q_air_cmd: commanded.q_air,
            q_co2: act.q_co2,
            q_air: act.q_air,
            q_d_cmd: signals.q_d_cmd,
            q_h_cmd: signals.q_h_cmd,
            q_d: act.q_d,
            q_h: act.q_h,
            cum_air_l: cum_air,
            cum_co2_l: cum_co2,
            cum_harv_g: cum_harv,
            mu_i: snap.rates.mu_i,
            mu_t: snap.rates.mu_t,
            mu_ph: snap.rates.mu_ph,
            mu_do: snap.rates.mu_do,
            i_av: snap.rates.i_av,
            p_gross: snap.rates.p_gross,
            mu_g: snap.rates.mu_g,
            m_resp: snap.rates.m_resp,
            q_w: act.q_w,
            t_in_hx: act.t_in_hx,
            t_out_hx: snap.fluxes.t_out_hx,
            hx_ua: params.thermal.hx_ua,
            q_hx: snap.fluxes.q_hx,
            q_w_max: limits.q_w_max,
            t_in_min: limits.t_in_min,
            t_in_max: limits.t_in_max,
        });

        state = integrator
            .advance(&state, &env, &act, geom, params, t_m)
            .map_err(|e| match e {
                Error::Integration { msg, state } => Error::Integration {
                    msg: format!("step {k} (t = {} s): {msg}", times[k]),
                    state,
                },
                other => other,
            })?;
    }

    Ok(ResultsLog {
        t_m,
        limits: *limits,
        controllers: controllers.names().map(str::to_string),
        records,
        initial_state: scenario.initial,
        final_state: state,
        delay_residue: delay.residue().copied().collect(),
    })
}
