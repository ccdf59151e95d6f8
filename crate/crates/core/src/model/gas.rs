use crate::model::geometry::ReactorGeometry;
use crate::model::params::ModelParameters;
use crate::model::state::{ActuatorInputs, StateVector};

/// Sump bubbling coefficients, raw and scaled to the whole culture volume.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GasTransfer {
    /// Superficial velocities in the sump [m·s⁻¹].
    pub u_g_co2: f64,
    pub u_g_o2: f64,
    /// Sump kLa [s⁻¹].
    pub kla_co2: f64,
    pub kla_o2: f64,
    /// kLa scaled by `A_sump / V` [s⁻¹].
    pub kla_co2_eff: f64,
    pub kla_o2_eff: f64,
    /// CO2 exchange driven by air bubbles [s⁻¹].
    pub strip_co2_by_o2: f64,
    /// O2 removal driven by CO2 bubbles [s⁻¹].
    pub strip_o2_by_co2: f64,
}

fn power_law(alpha: f64, u_g: f64, beta: f64) -> f64 {
    if u_g > 0.0 {
        alpha * u_g.powf(beta)
    } else {
        0.0
    }
}

pub fn gas_transfer_coeffs(
    act: &ActuatorInputs,
    state: &StateVector,
    geom: &ReactorGeometry,
    params: &ModelParameters,
) -> GasTransfer {
    let e = &params.engineering;
    let a_sump = geom.sump_area();
    let u_g_co2 = act.q_co2.max(0.0) / a_sump;
    let u_g_o2 = act.q_air.max(0.0) / a_sump;
    let kla_co2 = power_law(e.alpha_co2, u_g_co2, e.beta_co2);
    let kla_o2 = power_law(e.alpha_o2, u_g_o2, e.beta_o2);
    let scale = a_sump / state.vol;
    let kla_co2_eff = kla_co2 * scale;
    let kla_o2_eff = kla_o2 * scale;
    GasTransfer {
        u_g_co2,
        u_g_o2,
        kla_co2,
        kla_o2,
        kla_co2_eff,
        kla_o2_eff,
        strip_co2_by_o2: e.k_strip_co2_by_o2 * kla_o2_eff,
        strip_o2_by_co2: e.k_strip_o2_by_co2 * kla_co2_eff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (ReactorGeometry, ModelParameters, StateVector) {
        let geom = ReactorGeometry::default();
        let params = ModelParameters::default();
        let state = crate::model::nominal_state(&geom, &params).unwrap();
        (geom, params, state)
    }

    #[test]
    fn zero_flow_gives_zero_transfer() {
        let (geom, params, state) = setup();
        let act = ActuatorInputs {
            q_air: 1e-3,
            ..Default::default()
        };
        let g = gas_transfer_coeffs(&act, &state, &geom, &params);
        assert_eq!(g.kla_co2, 0.0);
        assert_eq!(g.strip_o2_by_co2, 0.0);
        assert!(g.kla_o2 > 0.0);
    }

    #[test]
    fn unit_superficial_velocity_gives_alpha() {
        let (geom, params, state) = setup();
        let act = ActuatorInputs {
            q_air: geom.sump_area(),
            ..Default::default()
        };
        let g = gas_transfer_coeffs(&act, &state, &geom, &params);
        assert_eq!(g.kla_o2, params.engineering.alpha_o2);
    }

    #[test]
    fn doubling_volume_halves_effective_coefficients() {
        let (geom, params, state) = setup();
        let act = ActuatorInputs {
            q_air: 5e-3,
            q_co2: 2e-4,
            ..Default::default()
        };
        let big = StateVector {
            vol: 2.0 * state.vol,
            ..state
        };
        let g1 = gas_transfer_coeffs(&act, &state, &geom, &params);
        let g2 = gas_transfer_coeffs(&act, &big, &geom, &params);
        assert!((g1.kla_o2_eff / g2.kla_o2_eff - 2.0).abs() < 1e-14);
        assert!((g1.kla_co2_eff / g2.kla_co2_eff - 2.0).abs() < 1e-14);
    }
}
