//! Baseline controllers for the four slots and their selection by name.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::empc::{Empc, EmpcSettings, PredictorModel};
use super::primitives::{Hysteresis, PiGains, PiLoop};
use super::{ControlContext, ControlSignals, Controller, ControllerSet};
use crate::error::{Error, Result};
use crate::model::{ModelParameters, ReactorGeometry};
use crate::sim::ActuatorLimits;

/// Tunables of every baseline controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSettings {
    pub ph_onoff_upper: f64,
    pub ph_onoff_lower: f64,
    pub do_onoff_upper: f64,
    pub do_onoff_lower: f64,
    pub ph_pi: PiGains,
    pub do_pi: PiGains,
    pub temp_pi: PiGains,
    /// Dead band of the heat-exchanger on/off rule [°C].
    pub temp_band: f64,
    pub t_hot: f64,
    pub t_cold: f64,
    /// Hour of day at which the fixed schedule starts harvesting.
    pub harvest_hour: u32,
    /// Fraction of the nominal depth removed by each daily harvest.
    pub harvest_fraction: f64,
    pub turbidostat_x: f64,
    pub turbidostat_depth: f64,
    /// Relative half-width of the turbidostat switching bands.
    pub turbidostat_band: f64,
    pub empc: EmpcSettings,
}

impl Default for ControllerSettings {
    fn default() -> Self {
        ControllerSettings {
            ph_onoff_upper: 8.1,
            ph_onoff_lower: 7.9,
            do_onoff_upper: 150.0,
            do_onoff_lower: 145.0,
            // SIMC with tau_c = theta on step-test FOPDT fits of the default plant:
            // pH (K = -7.0e3 s m-3, tau = 800 s, theta = 345 s),
            // DO (K = -4.6e4 % s m-3, tau = 540 s, theta = 360 s).
            ph_pi: PiGains {
                k_c: -1.656e-4,
                t_i: 800.0,
            },
            do_pi: PiGains {
                k_c: -1.630e-5,
                t_i: 540.0,
            },
            temp_pi: PiGains {
                k_c: 1.4e-4,
                t_i: 2850.0,
            },
            temp_band: 2.0,
            t_hot: 50.0,
            t_cold: 20.0,
            harvest_hour: 9,
            harvest_fraction: 0.2,
            turbidostat_x: 0.5,
            turbidostat_depth: 0.15,
            turbidostat_band: 0.01,
            empc: EmpcSettings::default(),
        }
    }
}

impl ControllerSettings {
    pub fn validate(&self) -> Result<()> {
        Hysteresis::new(self.ph_onoff_upper, self.ph_onoff_lower)?;
        Hysteresis::new(self.do_onoff_upper, self.do_onoff_lower)?;
        if !(self.temp_band > 0.0) {
            return Err(Error::Config(format!(
                "temp_band must be positive, got {}",
                self.temp_band
            )));
        }
        if self.harvest_hour >= 24 || !(self.harvest_fraction > 0.0 && self.harvest_fraction < 1.0) {
            return Err(Error::Config(
                "harvest_hour must be < 24 and harvest_fraction in (0, 1)".into(),
            ));
        }
        if !(self.turbidostat_band >= 0.0 && self.turbidostat_band < 1.0) {
            return Err(Error::Config("turbidostat_band must lie in [0, 1)".into()));
        }
        if !(self.turbidostat_x > 0.0 && self.turbidostat_depth > 0.0) {
            return Err(Error::Config("turbidostat thresholds must be positive".into()));
        }
        self.empc.validate()
    }
}

/// CO2 on/off with a hysteresis band on pH.
#[derive(Debug, Clone)]
pub struct PhOnOff {
    switch: Hysteresis,
    q_max: f64,
}

impl PhOnOff {
    pub fn new(upper: f64, lower: f64, q_co2_max: f64) -> Result<Self> {
        Ok(PhOnOff {
            switch: Hysteresis::new(upper, lower)?,
            q_max: q_co2_max,
        })
    }
}

impl Controller for PhOnOff {
    fn name(&self) -> &str {
        "ph-onoff"
    }

    fn step(&mut self, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> Result<()> {
        s.q_co2 = if self.switch.update(ctx.obs.ph) {
            self.q_max
        } else {
            0.0
        };
        Ok(())
    }
}

/// Aeration on/off with a hysteresis band on DO.
#[derive(Debug, Clone)]
pub struct DoOnOff {
    switch: Hysteresis,
    q_max: f64,
}

impl DoOnOff {
    pub fn new(upper: f64, lower: f64, q_air_max: f64) -> Result<Self> {
        Ok(DoOnOff {
            switch: Hysteresis::new(upper, lower)?,
            q_max: q_air_max,
        })
    }
}

impl Controller for DoOnOff {
    fn name(&self) -> &str {
        "do-onoff"
    }

    fn step(&mut self, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> Result<()> {
        s.q_air = if self.switch.update(ctx.obs.do_pct) {
            self.q_max
        } else {
            0.0
        };
        Ok(())
    }
}

/// PI on pH acting on the CO2 flow.
#[derive(Debug, Clone)]
pub struct PhPi {
    pub pi: PiLoop,
}

impl PhPi {
    pub fn new(gains: PiGains, q_co2_max: f64) -> Result<Self> {
        Ok(PhPi {
            pi: PiLoop::new(gains, 0.0, q_co2_max)?,
        })
    }
}

impl Controller for PhPi {
    fn name(&self) -> &str {
        "ph-pi"
    }

    fn step(&mut self, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> Result<()> {
        s.q_co2 = self.pi.update(ctx.refs.ph_ref - ctx.obs.ph, ctx.timeline.dt);
        Ok(())
    }
}

/// PI on DO acting on the air flow.
#[derive(Debug, Clone)]
pub struct DoPi {
    pub pi: PiLoop,
}

impl DoPi {
    pub fn new(gains: PiGains, q_air_max: f64) -> Result<Self> {
        Ok(DoPi {
            pi: PiLoop::new(gains, 0.0, q_air_max)?,
        })
    }
}

impl Controller for DoPi {
    fn name(&self) -> &str {
        "do-pi"
    }

    fn step(&mut self, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> Result<()> {
        s.q_air = self.pi.update(ctx.refs.do_ref - ctx.obs.do_pct, ctx.timeline.dt);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HarvestPhase {
    Idle,
    Harvest,
    Dilute,
}

/// Daily open-loop schedule: harvest at a fixed hour down to a fraction of the
/// nominal depth, then dilute back to it.
#[derive(Debug, Clone)]
pub struct FixedHarvest {
    hour: u32,
    fraction: f64,
    nominal_depth: Option<f64>,
    phase: HarvestPhase,
    last_day: Option<i64>,
}

impl FixedHarvest {
    pub fn new(hour: u32, fraction: f64) -> Self {
        FixedHarvest {
            hour,
            fraction,
            nominal_depth: None,
            phase: HarvestPhase::Idle,
            last_day: None,
        }
    }

    pub fn nominal_depth(&self) -> Option<f64> {
        self.nominal_depth
    }
}

impl Controller for FixedHarvest {
    fn name(&self) -> &str {
        "hd-fixed"
    }

    fn step(&mut self, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> Result<()> {
        let nominal = *self.nominal_depth.get_or_insert(ctx.obs.depth);
        let tl = &ctx.timeline;
        let day = ((tl.time - tl.time_secday) / super::SECONDS_PER_DAY).round() as i64;
        if self.phase == HarvestPhase::Idle && tl.hour == self.hour && tl.min == 0 && self.last_day != Some(day) {
            self.phase = HarvestPhase::Harvest;
            self.last_day = Some(day);
        }
        if self.phase == HarvestPhase::Harvest && ctx.obs.depth <= (1.0 - self.fraction) * nominal {
            self.phase = HarvestPhase::Dilute;
        }
        if self.phase == HarvestPhase::Dilute && ctx.obs.depth >= nominal {
            self.phase = HarvestPhase::Idle;
        }
        s.q_h_cmd = f64::from(u8::from(self.phase == HarvestPhase::Harvest));
        s.q_d_cmd = f64::from(u8::from(self.phase == HarvestPhase::Dilute));
        Ok(())
    }
}

/// Harvest once the depth exceeds its setpoint by the relative band, down to the setpoint.
///
/// Only evaporation lowers the level between harvests, so a band centred on the setpoint
/// would park the mean depth near its lower edge.
#[derive(Debug, Clone)]
pub struct LevelHarvest {
    switch: Hysteresis,
}

impl LevelHarvest {
    pub fn new(depth: f64, band: f64) -> Result<Self> {
        let switch = if band == 0.0 {
            band_switch(depth, 0.0)?
        } else {
            Hysteresis::new(depth * (1.0 + band), depth)?
        };
        Ok(LevelHarvest { switch })
    }

    pub fn command(&mut self, depth: f64) -> f64 {
        f64::from(u8::from(self.switch.update(depth)))
    }
}

fn band_switch(threshold: f64, band: f64) -> Result<Hysteresis> {
    if band == 0.0 {
        // degenerate band: switch exactly at the threshold
        let eps = threshold.abs() * f64::EPSILON;
        return Hysteresis::new(threshold + eps, threshold - eps);
    }
    Hysteresis::new(threshold * (1.0 + band), threshold * (1.0 - band))
}

/// Closed-loop biomass and depth regulation.
#[derive(Debug, Clone)]
pub struct Turbidostat {
    dilution: Hysteresis,
    harvest: LevelHarvest,
}

impl Turbidostat {
    pub fn new(x_set: f64, depth_set: f64, band: f64) -> Result<Self> {
        Ok(Turbidostat {
            dilution: band_switch(x_set, band)?,
            harvest: LevelHarvest::new(depth_set, band)?,
        })
    }
}

impl Controller for Turbidostat {
    fn name(&self) -> &str {
        "hd-turbidostat"
    }

    fn step(&mut self, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> Result<()> {
        s.q_d_cmd = f64::from(u8::from(self.dilution.update(ctx.obs.x_alg_gl)));
        s.q_h_cmd = self.harvest.command(ctx.obs.depth);
        Ok(())
    }
}

/// Heat exchanger switched off permanently.
#[derive(Debug, Clone, Default)]
pub struct TempOff {
    t_in: f64,
}

impl TempOff {
    pub fn new(t_in: f64) -> Self {
        TempOff { t_in }
    }
}

impl Controller for TempOff {
    fn name(&self) -> &str {
        "temp-none"
    }

    fn step(&mut self, _ctx: &ControlContext<'_>, s: &mut ControlSignals) -> Result<()> {
        s.q_w = 0.0;
        s.t_in_hx = self.t_in;
        Ok(())
    }
}

/// Full hot or cold flow outside a dead band around the temperature setpoint.
#[derive(Debug, Clone)]
pub struct TempOnOff {
    band: f64,
    q_max: f64,
    t_hot: f64,
    t_cold: f64,
}

impl TempOnOff {
    pub fn new(band: f64, q_w_max: f64, t_hot: f64, t_cold: f64) -> Self {
        TempOnOff {
            band,
            q_max: q_w_max,
            t_hot,
            t_cold,
        }
    }
}

impl Controller for TempOnOff {
    fn name(&self) -> &str {
        "temp-onoff"
    }

    fn step(&mut self, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> Result<()> {
        let t = ctx.obs.temp;
        let r = ctx.refs.temp_ref;
        if t > r + self.band {
            s.q_w = self.q_max;
            s.t_in_hx = self.t_cold;
        } else if t < r - self.band {
            s.q_w = self.q_max;
            s.t_in_hx = self.t_hot;
        } else {
            s.q_w = 0.0;
        }
        Ok(())
    }
}

/// Split-range PI: positive output drives the hot stream, negative the cold one.
#[derive(Debug, Clone)]
pub struct TempPi {
    pub pi: PiLoop,
    t_hot: f64,
    t_cold: f64,
}

impl TempPi {
    pub fn new(gains: PiGains, q_w_max: f64, t_hot: f64, t_cold: f64) -> Result<Self> {
        Ok(TempPi {
            pi: PiLoop::new(gains, -q_w_max, q_w_max)?,
            t_hot,
            t_cold,
        })
    }
}

impl Controller for TempPi {
    fn name(&self) -> &str {
        "temp-pi"
    }

    fn step(&mut self, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> Result<()> {
        let u = self.pi.update(ctx.refs.temp_ref - ctx.obs.temp, ctx.timeline.dt);
        s.q_w = u.abs();
        if u > 0.0 {
            s.t_in_hx = self.t_hot;
        } else if u < 0.0 {
            s.t_in_hx = self.t_cold;
        }
        Ok(())
    }
}

macro_rules! mode_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::Config(format!(
                        "unknown {} controller '{other}' (expected one of: {})",
                        stringify!($name),
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text),+ })
            }
        }
    };
}

mode_enum!(PhMode { OnOff => "onoff", Pi => "pi" });
mode_enum!(DoMode { OnOff => "onoff", Pi => "pi" });
mode_enum!(HdMode { Fixed => "fixed", Turbidostat => "turbidostat", Empc => "empc" });
mode_enum!(TempMode { None => "none", OnOff => "onoff", Pi => "pi" });

/// Controller choice for each slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSelection {
    pub ph: PhMode,
    #[serde(rename = "do")]
    pub do_: DoMode,
    pub hd: HdMode,
    pub temp: TempMode,
}

impl ControllerSelection {
    pub const PLAYER_1: Self = ControllerSelection {
        ph: PhMode::OnOff,
        do_: DoMode::OnOff,
        hd: HdMode::Fixed,
        temp: TempMode::None,
    };
    pub const PLAYER_2: Self = ControllerSelection {
        ph: PhMode::Pi,
        do_: DoMode::Pi,
        hd: HdMode::Fixed,
        temp: TempMode::OnOff,
    };
    pub const PLAYER_3: Self = ControllerSelection {
        ph: PhMode::Pi,
        do_: DoMode::Pi,
        hd: HdMode::Turbidostat,
        temp: TempMode::Pi,
    };
    pub const PLAYER_4: Self = ControllerSelection {
        ph: PhMode::Pi,
        do_: DoMode::Pi,
        hd: HdMode::Empc,
        temp: TempMode::Pi,
    };
}

impl Default for ControllerSelection {
    fn default() -> Self {
        Self::PLAYER_1
    }
}

/// Instantiates the selected baseline controllers.
pub fn build_controllers(
    sel: &ControllerSelection,
    settings: &ControllerSettings,
    limits: &ActuatorLimits,
    geom: &ReactorGeometry,
    params: &ModelParameters,
) -> Result<ControllerSet> {
    settings.validate()?;
    let ph: Box<dyn Controller> = match sel.ph {
        PhMode::OnOff => Box::new(PhOnOff::new(
            settings.ph_onoff_upper,
            settings.ph_onoff_lower,
            limits.q_co2_max,
        )?),
        PhMode::Pi => Box::new(PhPi::new(settings.ph_pi, limits.q_co2_max)?),
    };
    let do_: Box<dyn Controller> = match sel.do_ {
        DoMode::OnOff => Box::new(DoOnOff::new(
            settings.do_onoff_upper,
            settings.do_onoff_lower,
            limits.q_air_max,
        )?),
        DoMode::Pi => Box::new(DoPi::new(settings.do_pi, limits.q_air_max)?),
    };
    let hd: Box<dyn Controller> = match sel.hd {
        HdMode::Fixed => Box::new(FixedHarvest::new(settings.harvest_hour, settings.harvest_fraction)),
        HdMode::Turbidostat => Box::new(Turbidostat::new(
            settings.turbidostat_x,
            settings.turbidostat_depth,
            settings.turbidostat_band,
        )?),
        HdMode::Empc => {
            let model = PredictorModel {
                geom: *geom,
                params: params.clone(),
                pump_rate: limits.pump_rate,
            };
            let level = LevelHarvest::new(settings.turbidostat_depth, settings.turbidostat_band)?;
            Box::new(Empc::new(settings.empc.clone(), model, level)?)
        }
    };
    let temp: Box<dyn Controller> = match sel.temp {
        TempMode::None => Box::new(TempOff::new(settings.t_cold)),
        TempMode::OnOff => Box::new(TempOnOff::new(
            settings.temp_band,
            limits.q_w_max,
            settings.t_hot,
            settings.t_cold,
        )),
        TempMode::Pi => Box::new(TempPi::new(
            settings.temp_pi,
            limits.q_w_max,
            settings.t_hot,
            settings.t_cold,
        )?),
    };
    Ok(ControllerSet::new(ph, do_, hd, temp))
}
