use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of dynamic states of the plant.
pub const N_STATES: usize = 7;

/// Dynamic state of the raceway. Concentrations are in mol·m⁻³ except biomass (g·m⁻³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    /// Biomass concentration [g·m⁻³].
    pub x_alg: f64,
    /// Dissolved oxygen [mol·m⁻³].
    pub x_o2: f64,
    /// Dissolved inorganic carbon [mol·m⁻³].
    pub dic: f64,
    /// Strong cations [mol·m⁻³].
    pub cat: f64,
    /// Protons [mol·m⁻³].
    pub h: f64,
    /// Bulk temperature [°C].
    pub temp: f64,
    /// Culture volume [m³].
    pub vol: f64,
}

impl StateVector {
    pub const NAMES: [&'static str; N_STATES] = ["x_alg", "x_o2", "dic", "cat", "h", "temp", "vol"];

    pub fn to_array(&self) -> [f64; N_STATES] {
        [self.x_alg, self.x_o2, self.dic, self.cat, self.h, self.temp, self.vol]
    }

    pub fn from_array(a: &[f64]) -> Self {
        StateVector {
            x_alg: a[0],
            x_o2: a[1],
            dic: a[2],
            cat: a[3],
            h: a[4],
            temp: a[5],
            vol: a[6],
        }
    }

    /// Checks the state invariants against the sump volume of the reactor.
    pub fn validate(&self, sump_volume: f64) -> Result<()> {
        if self.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite state {self:?}")));
        }
        if self.x_alg < 0.0 || self.x_o2 < 0.0 || self.dic < 0.0 || self.cat < 0.0 {
            return Err(Error::Domain(format!("negative concentration in {self:?}")));
        }
        if self.h <= 0.0 {
            return Err(Error::Domain(format!(
                "proton concentration must be positive, got {}",
                self.h
            )));
        }
        if self.vol <= sump_volume {
            return Err(Error::Domain(format!(
                "volume {} does not exceed the sump volume {sump_volume}",
                self.vol
            )));
        }
        Ok(())
    }
}

/// One sample of the meteorological disturbances.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeteoSample {
    /// Global irradiance [W·m⁻²].
    pub rad_global: f64,
    /// Photosynthetically active radiation [µmol·m⁻²·s⁻¹].
    pub rad_par: f64,
    /// Ambient temperature [°C].
    pub temp_ext: f64,
    /// Relative humidity [%].
    pub rh: f64,
    /// Wind speed [m·s⁻¹].
    pub wind: f64,
}

impl MeteoSample {
    pub fn validate(&self) -> Result<()> {
        let v = [self.rad_global, self.rad_par, self.temp_ext, self.rh, self.wind];
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite meteorology {self:?}")));
        }
        if self.rad_global < 0.0 || self.rad_par < 0.0 {
            return Err(Error::Domain("negative irradiance".into()));
        }
        if !(0.0..=100.0).contains(&self.rh) {
            return Err(Error::Domain(format!("relative humidity {} outside [0, 100]", self.rh)));
        }
        if self.wind < 0.0 {
            return Err(Error::Domain("negative wind speed".into()));
        }
        Ok(())
    }
}

/// Physical actuator values fed to the plant (after saturation and delay).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorInputs {
    /// CO2 injection [m³·s⁻¹].
    pub q_co2: f64,
    /// Air injection [m³·s⁻¹].
    pub q_air: f64,
    /// Dilution inflow [m³·s⁻¹].
    pub q_d: f64,
    /// Harvest outflow [m³·s⁻¹].
    pub q_h: f64,
    /// Heat-exchanger coil flow [m³·s⁻¹].
    pub q_w: f64,
    /// Heat-exchanger inlet temperature [°C].
    pub t_in_hx: f64,
}

/// Outputs reported to controllers and users.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DerivedOutputs {
    pub ph: f64,
    /// Dissolved oxygen [% of air saturation].
    pub do_pct: f64,
    /// Biomass [g·L⁻¹].
    pub x_alg_gl: f64,
    /// Culture depth over the channel [m].
    pub depth: f64,
}
