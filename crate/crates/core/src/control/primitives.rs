//! Hysteresis switching, SIMC tuning and the PI law with conditional integration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On when `y > upper`, off when `y < lower`, unchanged inside the band.
pub fn onoff_hysteresis(y: f64, upper: f64, lower: f64, was_active: bool) -> Result<bool> {
    if !(lower < upper) {
        return Err(Error::Config(format!(
            "hysteresis needs lower < upper, got {lower} / {upper}"
        )));
    }
    Ok(if y > upper {
        true
    } else if y < lower {
        false
    } else {
        was_active
    })
}

/// A hysteresis switch with its remembered state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hysteresis {
    pub upper: f64,
    pub lower: f64,
    pub active: bool,
}

impl Hysteresis {
    pub fn new(upper: f64, lower: f64) -> Result<Self> {
        onoff_hysteresis(0.5 * (upper + lower), upper, lower, false)?;
        Ok(Hysteresis {
            upper,
            lower,
            active: false,
        })
    }

    pub fn update(&mut self, y: f64) -> bool {
        // band ordering was checked on construction
        self.active = if y > self.upper {
            true
        } else if y < self.lower {
            false
        } else {
            self.active
        };
        self.active
    }
}

/// SIMC PI rules for a first-order-plus-dead-time model `K e^{-θs}/(τs + 1)`.
pub fn simc_tune(k_gain: f64, tau: f64, theta: f64, tau_c: f64) -> Result<(f64, f64)> {
    if k_gain == 0.0 || !k_gain.is_finite() {
        return Err(Error::Config(format!("process gain must be nonzero, got {k_gain}")));
    }
    if !(tau > 0.0 && theta >= 0.0 && tau_c > 0.0) {
        return Err(Error::Config(format!(
            "SIMC needs tau > 0, theta >= 0, tau_c > 0; got {tau}, {theta}, {tau_c}"
        )));
    }
    let k_c = tau / (k_gain * (tau_c + theta));
    let t_i = tau.min(4.0 * (tau_c + theta));
    Ok((k_c, t_i))
}

/// One PI update. The integral is advanced first (as in `I += Ki·e·dt`) and left
/// unchanged when that would push an already saturated output further out.
pub fn pi_step(error: f64, integral: f64, k_c: f64, t_i: f64, dt: f64, u_min: f64, u_max: f64) -> (f64, f64) {
    let increment = k_c / t_i * error * dt;
    let candidate = integral + increment;
    let u_raw = k_c * error + candidate;
    let winding_up = (u_raw > u_max && increment > 0.0) || (u_raw < u_min && increment < 0.0);
    let integral = if winding_up { integral } else { candidate };
    let u = (k_c * error + integral).clamp(u_min, u_max);
    (u, integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiGains {
    pub k_c: f64,
    pub t_i: f64,
}

/// A PI loop with its persistent integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiLoop {
    pub gains: PiGains,
    pub u_min: f64,
    pub u_max: f64,
    pub integral: f64,
}

impl PiLoop {
    pub fn new(gains: PiGains, u_min: f64, u_max: f64) -> Result<Self> {
        if !(gains.t_i > 0.0) || !gains.k_c.is_finite() {
            return Err(Error::Config(format!("invalid PI gains {gains:?}")));
        }
        if !(u_min < u_max) {
            return Err(Error::Config(format!(
                "PI output range needs u_min < u_max, got {u_min} / {u_max}"
            )));
        }
        Ok(PiLoop {
            gains,
            u_min,
            u_max,
            integral: 0.0,
        })
    }

    pub fn update(&mut self, error: f64, dt: f64) -> f64 {
        let (u, i) = pi_step(
            error,
            self.integral,
            self.gains.k_c,
            self.gains.t_i,
            dt,
            self.u_min,
            self.u_max,
        );
        self.integral = i;
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hysteresis_examples() {
        assert!(onoff_hysteresis(8.2, 8.1, 7.9, false).unwrap());
        assert!(onoff_hysteresis(8.0, 8.1, 7.9, true).unwrap());
        assert!(!onoff_hysteresis(8.0, 8.1, 7.9, false).unwrap());
        assert!(!onoff_hysteresis(7.8, 8.1, 7.9, true).unwrap());
        assert!(onoff_hysteresis(8.0, 7.9, 8.1, true).is_err());
        assert!(onoff_hysteresis(8.0, 8.0, 8.0, true).is_err());
    }

    #[test]
    fn simc_rejects_zero_gain() {
        assert!(simc_tune(0.0, 100.0, 10.0, 10.0).is_err());
        assert!(simc_tune(1.0, 0.0, 10.0, 10.0).is_err());
    }

    #[test]
    fn pi_zero_error_gives_zero() {
        assert_eq!(pi_step(0.0, 0.0, 2.0, 10.0, 1.0, 0.0, 5.0), (0.0, 0.0));
        assert_eq!(pi_step(0.0, 0.0, 2.0, 10.0, 1.0, -1.0, 5.0).0, 0.0);
    }

    #[test]
    fn pi_integral_accumulates() {
        let (k_c, t_i, dt, e) = (0.5, 20.0, 1.0, 0.1);
        let mut integral = 0.0;
        let mut u = 0.0;
        for _ in 0..10 {
            (u, integral) = pi_step(e, integral, k_c, t_i, dt, -10.0, 10.0);
        }
        let expected = k_c * e + k_c * e / t_i * dt * 10.0;
        assert!((u - expected).abs() < 1e-15);
    }

    #[test]
    fn pi_output_respects_limits() {
        let (u, i) = pi_step(100.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0);
        assert_eq!(u, 1.0);
        // saturated high with a positive increment: integral frozen
        assert_eq!(i, 0.0);
        let (u, _) = pi_step(-100.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0);
        assert_eq!(u, 0.0);
    }

    #[test]
    fn pi_loop_rejects_bad_config() {
        let g = PiGains { k_c: 1.0, t_i: 0.0 };
        assert!(PiLoop::new(g, 0.0, 1.0).is_err());
        let g = PiGains { k_c: 1.0, t_i: 1.0 };
        assert!(PiLoop::new(g, 1.0, 1.0).is_err());
    }
}
