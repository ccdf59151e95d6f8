//! Henry's-law saturation concentrations and temperature-corrected carbonate constants.

use crate::error::{Error, Result};
use crate::model::params::ModelParameters;

/// Celsius to kelvin offset.
pub const KELVIN: f64 = 273.15;

/// mol·L⁻¹ → mol·m⁻³.
pub const PER_LITRE_TO_PER_M3: f64 = 1.0e3;

/// Temperature range [°C] over which the correlations are trusted.
pub const VALID_TEMP_RANGE: (f64, f64) = (-10.0, 60.0);

/// Equilibrium constants and gas saturation concentrations at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSet {
    /// First dissociation constant [mol·m⁻³].
    pub k1: f64,
    /// Second dissociation constant [mol·m⁻³].
    pub k2: f64,
    /// Water autoprotolysis [(mol·m⁻³)²].
    pub kw: f64,
    /// Henry constants [mol·m⁻³·atm⁻¹].
    pub kh_o2: f64,
    pub kh_co2: f64,
    /// O2 saturation against air [mol·m⁻³].
    pub x_o2_eq: f64,
    /// CO2 saturation against air [mol·m⁻³].
    pub co2_eq: f64,
    /// CO2 saturation against pure injected CO2 [mol·m⁻³].
    pub co2_iny: f64,
}

fn check_temp(temp: f64) -> Result<()> {
    if !temp.is_finite() || temp < VALID_TEMP_RANGE.0 || temp > VALID_TEMP_RANGE.1 {
        return Err(Error::Domain(format!(
            "temperature {temp} °C outside the validity window [{}, {}]",
            VALID_TEMP_RANGE.0, VALID_TEMP_RANGE.1
        )));
    }
    Ok(())
}

fn vant_hoff(k_ref: f64, dh: f64, r: f64, t_kelvin: f64, t_ref: f64) -> f64 {
    k_ref * (-dh / r * (1.0 / t_kelvin - 1.0 / t_ref)).exp()
}

/// Temperature-corrected `(K1, K2, KW)` in mol·m⁻³ units.
pub fn dissociation_constants(temp: f64, params: &ModelParameters) -> Result<(f64, f64, f64)> {
    check_temp(temp)?;
    let e = &params.engineering;
    let tk = temp + KELVIN;
    let c = PER_LITRE_TO_PER_M3;
    let k1 = vant_hoff(e.k1_ref * c, e.dh_k1, e.r_gas, tk, e.t_ref);
    let k2 = vant_hoff(e.k2_ref * c, e.dh_k2, e.r_gas, tk, e.t_ref);
    let kw = vant_hoff(e.kw_ref * c * c, e.dh_kw, e.r_gas, tk, e.t_ref);
    Ok((k1, k2, kw))
}

/// Henry constants and the three saturation concentrations:
/// `(kh_o2, kh_co2, x_o2_eq, co2_eq, co2_iny)`.
pub fn henry_equilibria(temp: f64, params: &ModelParameters) -> Result<(f64, f64, f64, f64, f64)> {
    check_temp(temp)?;
    let e = &params.engineering;
    let tk = temp + KELVIN;
    let kh = |k_ref: f64, c_g: f64| k_ref * (c_g * (1.0 / tk - 1.0 / e.t_ref)).exp();
    let kh_o2 = kh(e.kh_ref_o2, e.c_o2);
    let kh_co2 = kh(e.kh_ref_co2, e.c_co2);
    Ok((
        kh_o2,
        kh_co2,
        kh_o2 * e.p_atm * e.y_o2,
        kh_co2 * e.p_atm * e.y_co2,
        kh_co2 * e.p_atm * e.y_pure_co2,
    ))
}

impl EquilibriumSet {
    pub fn at(temp: f64, params: &ModelParameters) -> Result<Self> {
        let (k1, k2, kw) = dissociation_constants(temp, params)?;
        let (kh_o2, kh_co2, x_o2_eq, co2_eq, co2_iny) = henry_equilibria(temp, params)?;
        Ok(EquilibriumSet {
            k1,
            k2,
            kw,
            kh_o2,
            kh_co2,
            x_o2_eq,
            co2_eq,
            co2_iny,
        })
    }
}
