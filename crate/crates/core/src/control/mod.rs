//! Controller interface and the baseline controllers.
//!
//! Four slots (pH, DO, harvest/dilution, temperature) are invoked in that order each
//! sample. Every slot sees the same packed inputs and may write any field of the shared
//! [`ControlSignals`]; a slot's persistent state lives inside the controller value.

pub mod empc;
pub mod players;
pub mod primitives;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MeteoSample;

pub use empc::{
    predict_biomass, sequence_from_index, solve_empc, Empc, EmpcPlan, EmpcSettings, PinnedConditions, PredictorModel,
};
pub use players::{
    build_controllers, ControllerSelection, ControllerSettings, DoMode, DoOnOff, DoPi, FixedHarvest, HdMode,
    LevelHarvest, PhMode, PhOnOff, PhPi, TempMode, TempOff, TempOnOff, TempPi, Turbidostat,
};
pub use primitives::{onoff_hysteresis, pi_step, simc_tune, Hysteresis, PiGains, PiLoop};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Simulation clock as seen by the controllers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub dt: f64,
    pub index: usize,
    pub time: f64,
    /// Seconds since midnight, in `(0, 86400]`.
    pub time_secday: f64,
    pub hour: u32,
    pub min: u32,
}

impl Timeline {
    /// Clock at step `index`, for a scenario starting `day_offset` seconds after midnight.
    pub fn at(index: usize, dt: f64, day_offset: f64) -> Self {
        let time = index as f64 * dt;
        let rem = (day_offset + time).rem_euclid(SECONDS_PER_DAY);
        let time_secday = if rem == 0.0 { SECONDS_PER_DAY } else { rem };
        // hour/min from the position within the day, midnight reading as 0:00
        let hour = (rem / 3600.0).floor() as u32;
        let min = ((rem - f64::from(hour) * 3600.0) / 60.0).floor() as u32;
        Timeline {
            dt,
            index,
            time,
            time_secday,
            hour,
            min,
        }
    }
}

/// Measured process outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub ph: f64,
    pub do_pct: f64,
    pub depth: f64,
    pub x_alg_gl: f64,
    pub temp: f64,
}

/// Constant setpoints of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct References {
    pub ph_ref: f64,
    pub do_ref: f64,
    pub temp_ref: f64,
}

impl Default for References {
    fn default() -> Self {
        References {
            ph_ref: 8.0,
            do_ref: 150.0,
            temp_ref: 30.0,
        }
    }
}

/// Perfect preview of the disturbances after the current sample.
///
/// `times[i]` is the simulation time at which `samples[i]` applies.
#[derive(Debug, Clone, Copy)]
pub struct Forecast<'a> {
    pub times: &'a [f64],
    pub samples: &'a [MeteoSample],
}

impl<'a> Forecast<'a> {
    pub fn new(times: &'a [f64], samples: &'a [MeteoSample]) -> Self {
        assert_eq!(times.len(), samples.len(), "forecast vectors must be aligned");
        Forecast { times, samples }
    }

    pub fn empty() -> Forecast<'static> {
        Forecast {
            times: &[],
            samples: &[],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The sample in force at time `t` (sample-and-hold); `current` before the first entry.
    pub fn sample_at(&self, t: f64, current: &MeteoSample) -> MeteoSample {
        let n = self.times.partition_point(|&ti| ti <= t);
        if n == 0 {
            *current
        } else {
            self.samples[n - 1]
        }
    }

    pub fn end_time(&self) -> Option<f64> {
        self.times.last().copied()
    }
}

/// The six manipulated variables shared by the four slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSignals {
    /// CO2 flow [m³·s⁻¹].
    pub q_co2: f64,
    /// Air flow [m³·s⁻¹].
    pub q_air: f64,
    /// Dilution pump command, 0 or 1.
    pub q_d_cmd: f64,
    /// Harvest pump command, 0 or 1.
    pub q_h_cmd: f64,
    /// Heat-exchanger water flow [m³·s⁻¹].
    pub q_w: f64,
    /// Heat-exchanger inlet temperature [°C].
    pub t_in_hx: f64,
}

impl Default for ControlSignals {
    fn default() -> Self {
        ControlSignals {
            q_co2: 0.0,
            q_air: 0.0,
            q_d_cmd: 0.0,
            q_h_cmd: 0.0,
            q_w: 0.0,
            t_in_hx: 20.0,
        }
    }
}

impl ControlSignals {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let flows = [("q_co2", self.q_co2), ("q_air", self.q_air), ("q_w", self.q_w)];
        for (name, v) in flows {
            if !v.is_finite() || v < 0.0 {
                return Err(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        for (name, v) in [("q_d_cmd", self.q_d_cmd), ("q_h_cmd", self.q_h_cmd)] {
            if v != 0.0 && v != 1.0 {
                return Err(format!("{name} must be exactly 0 or 1, got {v}"));
            }
        }
        if !self.t_in_hx.is_finite() {
            return Err(format!("t_in_hx must be finite, got {}", self.t_in_hx));
        }
        Ok(())
    }
}

/// Everything a slot sees at one sample.
#[derive(Debug, Clone, Copy)]
pub struct ControlContext<'a> {
    pub timeline: Timeline,
    pub obs: Observation,
    pub refs: References,
    pub env: MeteoSample,
    pub forecast: Forecast<'a>,
}

/// A controller slot with its own persistent state.
pub trait Controller {
    fn name(&self) -> &str;

    /// Update the shared signals for this sample.
    fn step(&mut self, ctx: &ControlContext<'_>, signals: &mut ControlSignals) -> Result<()>;
}

/// Any closure with the slot signature is a controller.
pub struct FnController<F> {
    name: String,
    f: F,
}

impl<F> FnController<F>
where
    F: FnMut(&ControlContext<'_>, &mut ControlSignals) -> Result<()>,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnController { name: name.into(), f }
    }
}

impl<F> Controller for FnController<F>
where
    F: FnMut(&ControlContext<'_>, &mut ControlSignals) -> Result<()>,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn step(&mut self, ctx: &ControlContext<'_>, signals: &mut ControlSignals) -> Result<()> {
        (self.f)(ctx, signals)
    }
}

/// The four slots, invoked as pH, DO, harvest/dilution, temperature.
pub struct ControllerSet {
    pub ph: Box<dyn Controller>,
    pub do_: Box<dyn Controller>,
    pub hd: Box<dyn Controller>,
    pub temp: Box<dyn Controller>,
}

impl ControllerSet {
    pub fn new(
        ph: Box<dyn Controller>,
        do_: Box<dyn Controller>,
        hd: Box<dyn Controller>,
        temp: Box<dyn Controller>,
    ) -> Self {
        ControllerSet { ph, do_, hd, temp }
    }

    /// Runs the four slots in order; fails with the step index on a bad signal.
    pub fn step(&mut self, ctx: &ControlContext<'_>, signals: &mut ControlSignals) -> Result<()> {
        let step = ctx.timeline.index;
        for slot in [&mut self.ph, &mut self.do_, &mut self.hd, &mut self.temp] {
            slot.step(ctx, signals).map_err(|e| match e {
                Error::Controller { .. } => e,
                other => Error::Controller {
                    step,
                    msg: format!("{}: {other}", slot.name()),
                },
            })?;
        }
        signals.validate().map_err(|msg| Error::Controller { step, msg })
    }

    pub fn names(&self) -> [&str; 4] {
        [self.ph.name(), self.do_.name(), self.hd.name(), self.temp.name()]
    }
}
