//! Growth kinetics: light, temperature, pH and DO limitation, photosynthesis and respiration.

use crate::error::{Error, Result};
use crate::model::params::ModelParameters;
use crate::model::state::{DerivedOutputs, StateVector};

/// Below this optical depth the depth-averaged irradiance uses its series expansion.
const OPTICAL_DEPTH_SERIES: f64 = 1e-8;

/// Limitation factors and biological rates at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateBundle {
    /// Depth-averaged irradiance [µmol·m⁻²·s⁻¹].
    pub i_av: f64,
    pub mu_i: f64,
    pub mu_t: f64,
    pub mu_ph: f64,
    pub mu_do: f64,
    /// Gross photosynthesis [s⁻¹].
    pub p_gross: f64,
    /// Specific growth [s⁻¹].
    pub mu_g: f64,
    /// Maintenance and respiration [s⁻¹].
    pub m_resp: f64,
}

/// PAR in µmol·m⁻²·s⁻¹ from global irradiance in W·m⁻².
pub fn par_from_global(rad_global: f64) -> Result<f64> {
    if !rad_global.is_finite() || rad_global < 0.0 {
        return Err(Error::Domain(format!(
            "global irradiance must be non-negative, got {rad_global}"
        )));
    }
    Ok(0.46 * 4.56 * rad_global)
}

/// Cubic window: zero outside `(a, c)`, smoothstep up to 1 at `b`, smoothstep back down to `c`.
pub fn smooth_window(x: f64, a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a < b && b < c) {
        return Err(Error::Config(format!("window requires a < b < c, got ({a}, {b}, {c})")));
    }
    Ok(window_unchecked(x, a, b, c))
}

fn window_unchecked(x: f64, a: f64, b: f64, c: f64) -> f64 {
    let r = if x <= a || x >= c {
        return 0.0;
    } else if x <= b {
        (x - a) / (b - a)
    } else {
        (c - x) / (c - b)
    };
    r * r * (3.0 - 2.0 * r)
}

/// Depth-averaged irradiance under Beer–Lambert attenuation and the resulting light factor.
pub fn light_limitation(par: f64, x_alg: f64, depth: f64, params: &ModelParameters) -> Result<(f64, f64)> {
    if !(par >= 0.0) || !(x_alg >= 0.0) || !(depth > 0.0) {
        return Err(Error::Domain(format!(
            "light limitation needs par >= 0, x_alg >= 0, depth > 0; got ({par}, {x_alg}, {depth})"
        )));
    }
    let b = &params.biological;
    let z = b.light_extinction * depth * x_alg;
    let attenuation = if z < OPTICAL_DEPTH_SERIES {
        1.0 - 0.5 * z
    } else {
        -(-z).exp_m1() / z
    };
    let i_av = par * attenuation;
    if i_av <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let ik_n = b.i_k.powf(b.light_exponent);
    let iav_n = i_av.powf(b.light_exponent);
    Ok((i_av, iav_n / (ik_n + iav_n)))
}

/// Growth inhibition by oxygen supersaturation, clamped to [0, 1].
pub fn do_inhibition(do_pct: f64, params: &ModelParameters) -> f64 {
    let b = &params.biological;
    let ratio = (do_pct.max(0.0) / b.do_max).powf(b.do_exponent);
    (1.0 - ratio).clamp(0.0, 1.0)
}

/// All limitation factors and the gross, growth and maintenance rates.
pub fn biological_rates(
    state: &StateVector,
    par: f64,
    outputs: &DerivedOutputs,
    params: &ModelParameters,
) -> Result<RateBundle> {
    let b = &params.biological;
    let (i_av, mu_i) = light_limitation(par, state.x_alg, outputs.depth, params)?;
    let mu_t = window_unchecked(state.temp, b.temp_min, b.temp_opt, b.temp_max);
    let mu_ph = window_unchecked(outputs.ph, b.ph_min, b.ph_opt, b.ph_max);
    let mu_do = do_inhibition(outputs.do_pct, params);
    let p_gross = b.mu_max * mu_i * mu_t * mu_ph * mu_do;
    let m_resp = b.m_min * (1.0 + b.k_resp_light * (1.0 - mu_i)) * b.q10.powf((state.temp - 20.0) / 10.0);
    Ok(RateBundle {
        i_av,
        mu_i,
        mu_t,
        mu_ph,
        mu_do,
        p_gross,
        mu_g: b.eta_x * p_gross,
        m_resp,
    })
}
