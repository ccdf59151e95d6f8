use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the effective sky temperature for longwave exchange is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkyModel {
    /// Clear-sky emissivity from ambient vapour pressure and temperature (Idso).
    Idso,
    /// Sky radiates at ambient temperature.
    Ambient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalParams {
    /// Shortwave absorptance of the culture [-].
    pub alpha_rad: f64,
    /// Longwave emissivity of water [-].
    pub emissivity_water: f64,
    /// Stefan–Boltzmann constant [W·m⁻²·K⁻⁴].
    pub stefan_boltzmann: f64,
    pub sky_model: SkyModel,
    /// Liner thickness [m].
    pub liner_thickness: f64,
    /// Liner conductivity [W·m⁻¹·K⁻¹].
    pub liner_conductivity: f64,
    /// Effective subgrade thickness [m].
    pub ground_thickness: f64,
    /// Effective subgrade conductivity [W·m⁻¹·K⁻¹].
    pub ground_conductivity: f64,
    /// Ground reference temperature [°C].
    pub ground_temp: f64,
    /// Evaporation mass-transfer coefficient at zero wind [m·s⁻¹].
    pub evap_mass_transfer: f64,
    /// Linear wind sensitivity of the evaporation coefficient [s·m⁻¹].
    pub evap_wind_coeff: f64,
    /// Convective heat-transfer coefficient [W·m⁻²·K⁻¹].
    pub convection_coeff: f64,
    /// Paddlewheel power dissipated as heat [W].
    pub mixing_power: f64,
    /// Water density [kg·m⁻³].
    pub water_density: f64,
    /// Water specific heat [J·kg⁻¹·K⁻¹].
    pub water_heat_capacity: f64,
    /// Heat-exchanger conductance UA [W·K⁻¹].
    pub hx_ua: f64,
    /// Regularization of the coil capacity rate in the NTU effectiveness [W·K⁻¹].
    pub hx_regularization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiologicalParams {
    /// Maximum gross photosynthesis rate [s⁻¹].
    pub mu_max: f64,
    /// Fraction of gross photosynthesis converted to growth [-].
    pub eta_x: f64,
    /// Biomass-specific light extinction [m²·g⁻¹].
    pub light_extinction: f64,
    /// Irradiance half-saturation constant [µmol·m⁻²·s⁻¹].
    pub i_k: f64,
    /// Light-response exponent [-].
    pub light_exponent: f64,
    pub temp_min: f64,
    pub temp_opt: f64,
    pub temp_max: f64,
    pub ph_min: f64,
    pub ph_opt: f64,
    pub ph_max: f64,
    /// DO inhibition scale [% sat].
    pub do_max: f64,
    /// DO inhibition exponent [-].
    pub do_exponent: f64,
    /// Basal maintenance rate at 20 °C [s⁻¹].
    pub m_min: f64,
    /// Increase of respiration under light limitation [-].
    pub k_resp_light: f64,
    pub q10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineeringParams {
    /// kLa scale for CO2 injection [s⁻¹ at U_g = 1 m·s⁻¹].
    pub alpha_co2: f64,
    pub beta_co2: f64,
    /// kLa scale for air injection [s⁻¹ at U_g = 1 m·s⁻¹].
    pub alpha_o2: f64,
    pub beta_o2: f64,
    /// Free-surface transfer coefficients [s⁻¹].
    pub k_atm_co2: f64,
    pub k_atm_o2: f64,
    /// Paddlewheel transfer coefficients [s⁻¹].
    pub k_pw_co2: f64,
    pub k_pw_o2: f64,
    /// CO2 stripped by air bubbling, relative to the air kLa [-].
    pub k_strip_co2_by_o2: f64,
    /// O2 stripped by CO2 bubbling, relative to the CO2 kLa [-].
    pub k_strip_o2_by_co2: f64,
    /// g CO2 per g biomass.
    pub yield_co2: f64,
    /// g O2 per g biomass.
    pub yield_o2: f64,
    pub molar_mass_co2: f64,
    pub molar_mass_o2: f64,
    /// Inlet DIC of the dilution medium [mol·m⁻³].
    pub dic_in: f64,
    /// Inlet strong cations of the dilution medium [mol·m⁻³].
    pub cat_in: f64,
    /// Henry constants at the reference temperature [mol·m⁻³·atm⁻¹].
    pub kh_ref_o2: f64,
    pub kh_ref_co2: f64,
    /// Henry temperature factors [K].
    pub c_o2: f64,
    pub c_co2: f64,
    /// Dissociation constants at the reference temperature, literature units [mol·L⁻¹].
    pub k1_ref: f64,
    pub k2_ref: f64,
    /// Water autoprotolysis at the reference temperature [(mol·L⁻¹)²].
    pub kw_ref: f64,
    /// Effective enthalpies [J·mol⁻¹].
    pub dh_k1: f64,
    pub dh_k2: f64,
    pub dh_kw: f64,
    /// Gas constant [J·mol⁻¹·K⁻¹].
    pub r_gas: f64,
    /// Atmospheric pressure [atm].
    pub p_atm: f64,
    pub y_o2: f64,
    pub y_co2: f64,
    pub y_pure_co2: f64,
    /// Reference temperature [K].
    pub t_ref: f64,
}

/// All calibratable constants of the plant model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParameters {
    pub thermal: ThermalParams,
    pub biological: BiologicalParams,
    pub engineering: EngineeringParams,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("parameter `{name}` must be positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("parameter `{name}` must be finite, got {v}")))
    }
}

impl ModelParameters {
    pub fn validate(&self) -> Result<()> {
        let t = &self.thermal;
        for (n, v) in [
            ("alpha_rad", t.alpha_rad),
            ("emissivity_water", t.emissivity_water),
            ("stefan_boltzmann", t.stefan_boltzmann),
            ("liner_thickness", t.liner_thickness),
            ("liner_conductivity", t.liner_conductivity),
            ("ground_thickness", t.ground_thickness),
            ("ground_conductivity", t.ground_conductivity),
            ("evap_mass_transfer", t.evap_mass_transfer),
            ("convection_coeff", t.convection_coeff),
            ("water_density", t.water_density),
            ("water_heat_capacity", t.water_heat_capacity),
            ("hx_ua", t.hx_ua),
            ("hx_regularization", t.hx_regularization),
        ] {
            positive(n, v)?;
        }
        finite("ground_temp", t.ground_temp)?;
        finite("evap_wind_coeff", t.evap_wind_coeff)?;
        finite("mixing_power", t.mixing_power)?;
        if t.mixing_power < 0.0 || t.evap_wind_coeff < 0.0 {
            return Err(Error::Config(
                "mixing_power and evap_wind_coeff must be non-negative".into(),
            ));
        }

        let b = &self.biological;
        for (n, v) in [
            ("mu_max", b.mu_max),
            ("light_extinction", b.light_extinction),
            ("i_k", b.i_k),
            ("light_exponent", b.light_exponent),
            ("do_max", b.do_max),
            ("do_exponent", b.do_exponent),
            ("m_min", b.m_min),
            ("q10", b.q10),
        ] {
            positive(n, v)?;
        }
        finite("k_resp_light", b.k_resp_light)?;
        if !(0.0..=1.0).contains(&b.eta_x) {
            return Err(Error::Config(format!("eta_x must lie in [0, 1], got {}", b.eta_x)));
        }
        if !(b.temp_min < b.temp_opt && b.temp_opt < b.temp_max) {
            return Err(Error::Config("temperature window must satisfy min < opt < max".into()));
        }
        if !(b.ph_min < b.ph_opt && b.ph_opt < b.ph_max) {
            return Err(Error::Config("pH window must satisfy min < opt < max".into()));
        }
        if b.do_max <= 100.0 {
            return Err(Error::Config(format!("do_max must exceed 100 %, got {}", b.do_max)));
        }

        let e = &self.engineering;
        for (n, v) in [
            ("alpha_co2", e.alpha_co2),
            ("alpha_o2", e.alpha_o2),
            ("k_atm_co2", e.k_atm_co2),
            ("k_atm_o2", e.k_atm_o2),
            ("k_pw_co2", e.k_pw_co2),
            ("k_pw_o2", e.k_pw_o2),
            ("k_strip_co2_by_o2", e.k_strip_co2_by_o2),
            ("k_strip_o2_by_co2", e.k_strip_o2_by_co2),
            ("yield_co2", e.yield_co2),
            ("yield_o2", e.yield_o2),
            ("molar_mass_co2", e.molar_mass_co2),
            ("molar_mass_o2", e.molar_mass_o2),
            ("dic_in", e.dic_in),
            ("cat_in", e.cat_in),
            ("kh_ref_o2", e.kh_ref_o2),
            ("kh_ref_co2", e.kh_ref_co2),
            ("k1_ref", e.k1_ref),
            ("k2_ref", e.k2_ref),
            ("kw_ref", e.kw_ref),
            ("r_gas", e.r_gas),
            ("p_atm", e.p_atm),
            ("y_o2", e.y_o2),
            ("y_co2", e.y_co2),
            ("t_ref", e.t_ref),
        ] {
            positive(n, v)?;
        }
        for (n, v) in [
            ("beta_co2", e.beta_co2),
            ("beta_o2", e.beta_o2),
            ("c_o2", e.c_o2),
            ("c_co2", e.c_co2),
            ("dh_k1", e.dh_k1),
            ("dh_k2", e.dh_k2),
            ("dh_kw", e.dh_kw),
        ] {
            finite(n, v)?;
        }
        if e.y_pure_co2 != 1.0 {
            return Err(Error::Config(format!("y_pure_co2 must be 1, got {}", e.y_pure_co2)));
        }
        Ok(())
    }
}
