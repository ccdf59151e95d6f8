//! Energy balance terms of the culture.

use crate::error::{Error, Result};
use crate::model::equilibria::KELVIN;
use crate::model::geometry::ReactorGeometry;
use crate::model::params::{ModelParameters, SkyModel};
use crate::model::state::{ActuatorInputs, MeteoSample, StateVector};

/// Molar mass of water [kg·mol⁻¹].
const MOLAR_MASS_WATER: f64 = 0.018015;

/// Heat flows acting on the culture [W], plus the evaporation rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThermalFluxes {
    pub q_irrad: f64,
    pub q_rad: f64,
    pub q_cond: f64,
    pub q_evap: f64,
    pub q_conv: f64,
    pub q_dil: f64,
    pub q_harv: f64,
    pub q_mix: f64,
    pub q_hx: f64,
    pub q_sum: f64,
    /// Evaporated mass [kg·s⁻¹].
    pub m_e_dot: f64,
    /// Evaporated volume [m³·s⁻¹].
    pub v_e_dot: f64,
    /// Coil outlet temperature [°C].
    pub t_out_hx: f64,
}

/// Saturation vapour pressure over water [Pa] (Magnus form).
pub fn saturation_vapour_pressure(temp: f64) -> f64 {
    611.2 * (17.62 * temp / (243.12 + temp)).exp()
}

/// Water vapour mass concentration [kg·m⁻³] at temperature `temp` and relative humidity `rh` [%].
pub fn vapour_concentration(temp: f64, rh: f64, r_gas: f64) -> f64 {
    rh / 100.0 * saturation_vapour_pressure(temp) * MOLAR_MASS_WATER / (r_gas * (temp + KELVIN))
}

/// Effective sky temperature [K].
pub fn sky_temperature(meteo: &MeteoSample, params: &ModelParameters) -> f64 {
    let t_air = meteo.temp_ext + KELVIN;
    match params.thermal.sky_model {
        SkyModel::Ambient => t_air,
        SkyModel::Idso => {
            // vapour pressure in hPa
            let e_a = meteo.rh / 100.0 * saturation_vapour_pressure(meteo.temp_ext) / 100.0;
            let emissivity = (0.70 + 5.95e-5 * e_a * (1500.0 / t_air).exp()).min(1.0);
            emissivity.powf(0.25) * t_air
        }
    }
}

/// Latent heat of vaporization [J·kg⁻¹].
pub fn latent_heat(temp: f64) -> f64 {
    2.501e6 - 2361.0 * temp
}

/// Coil effectiveness-NTU heat flow `(q_hx, t_out)`.
pub fn heat_exchanger(q_w: f64, t_in: f64, temp: f64, params: &ModelParameters) -> (f64, f64) {
    let t = &params.thermal;
    let c_w = t.water_density * t.water_heat_capacity * q_w;
    let eff = 1.0 - (-t.hx_ua / c_w.max(t.hx_regularization)).exp();
    let q_hx = c_w * (t_in - temp) * eff;
    let t_out = if c_w > 0.0 { t_in - q_hx / c_w } else { t_in };
    (q_hx, t_out)
}

pub fn thermal_fluxes(
    state: &StateVector,
    meteo: &MeteoSample,
    act: &ActuatorInputs,
    geom: &ReactorGeometry,
    params: &ModelParameters,
) -> Result<ThermalFluxes> {
    let met = [meteo.rad_global, meteo.temp_ext, meteo.rh, meteo.wind];
    if met.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite meteorology {meteo:?}")));
    }
    let t = &params.thermal;
    let area = geom.area();
    let temp = state.temp;
    let rho_cp = t.water_density * t.water_heat_capacity;

    let q_irrad = t.alpha_rad * area * meteo.rad_global;

    let t_sky = sky_temperature(meteo, params);
    let t_water = temp + KELVIN;
    let q_rad = t.stefan_boltzmann * t.emissivity_water * area * (t_sky.powi(4) - t_water.powi(4));

    let resistance = t.liner_thickness / t.liner_conductivity + t.ground_thickness / t.ground_conductivity;
    let q_cond = area / resistance * (t.ground_temp - temp);

    let k_m = t.evap_mass_transfer * (1.0 + t.evap_wind_coeff * meteo.wind);
    let c_s = vapour_concentration(temp, 100.0, params.engineering.r_gas);
    let c_a = vapour_concentration(meteo.temp_ext, meteo.rh, params.engineering.r_gas);
    let m_e_dot = (k_m * area * (c_s - c_a)).max(0.0);
    let q_evap = -latent_heat(temp) * m_e_dot;

    let q_conv = t.convection_coeff * area * (meteo.temp_ext - temp);

    // fresh medium enters at ambient temperature
    let q_dil = rho_cp * act.q_d * meteo.temp_ext;
    let q_harv = -rho_cp * act.q_h * temp;

    let q_mix = t.mixing_power;

    let (q_hx, t_out_hx) = heat_exchanger(act.q_w, act.t_in_hx, temp, params);

    let q_sum = q_irrad + q_rad + q_cond + q_evap + q_conv + q_dil + q_harv + q_mix + q_hx;
    Ok(ThermalFluxes {
        q_irrad,
        q_rad,
        q_cond,
        q_evap,
        q_conv,
        q_dil,
        q_harv,
        q_mix,
        q_hx,
        q_sum,
        m_e_dot,
        v_e_dot: m_e_dot / t.water_density,
        t_out_hx,
    })
}
