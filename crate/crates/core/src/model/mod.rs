//! Well-mixed raceway plant: thermal, biological and physico-chemical submodels.
//!
//! Every function here is pure. The integrator and the closed loop only ever call
//! [`state_derivative`] / [`evaluate_plant`].

pub mod biology;
pub mod carbonate;
pub mod equilibria;
pub mod gas;
pub mod geometry;
pub mod params;
pub mod state;
pub mod thermal;

pub use biology::{biological_rates, do_inhibition, light_limitation, par_from_global, smooth_window, RateBundle};
pub use carbonate::{proton_derivative, speciate_carbonates, CarbonateSpeciation};
pub use equilibria::{dissociation_constants, henry_equilibria, EquilibriumSet};
pub use gas::{gas_transfer_coeffs, GasTransfer};
pub use geometry::ReactorGeometry;
pub use params::{BiologicalParams, EngineeringParams, ModelParameters, SkyModel, ThermalParams};
pub use state::{ActuatorInputs, DerivedOutputs, MeteoSample, StateVector, N_STATES};
pub use thermal::{thermal_fluxes, ThermalFluxes};

use crate::error::{Error, Result};

/// pH, DO saturation, biomass in g·L⁻¹ and depth.
pub fn compute_outputs(state: &StateVector, geom: &ReactorGeometry, eq: &EquilibriumSet) -> Result<DerivedOutputs> {
    if !(eq.x_o2_eq > 0.0) {
        return Err(Error::Domain(format!(
            "oxygen saturation must be positive, got {}",
            eq.x_o2_eq
        )));
    }
    if !(state.h > 0.0) {
        return Err(Error::Domain(format!(
            "proton concentration must be positive, got {}",
            state.h
        )));
    }
    Ok(DerivedOutputs {
        ph: -(state.h / 1000.0).log10(),
        do_pct: 100.0 * state.x_o2 / eq.x_o2_eq,
        x_alg_gl: state.x_alg / 1000.0,
        depth: geom.depth(state.vol),
    })
}

/// Everything computed while evaluating the plant at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantSnapshot {
    pub outputs: DerivedOutputs,
    pub equilibria: EquilibriumSet,
    pub speciation: CarbonateSpeciation,
    pub rates: RateBundle,
    pub fluxes: ThermalFluxes,
    pub gas: GasTransfer,
    pub derivative: StateVector,
}

/// Full evaluation of the coupled model, including the time derivative of the state.
pub fn evaluate_plant(
    state: &StateVector,
    meteo: &MeteoSample,
    act: &ActuatorInputs,
    geom: &ReactorGeometry,
    params: &ModelParameters,
) -> Result<PlantSnapshot> {
    let eq = EquilibriumSet::at(state.temp, params)?;
    let outputs = compute_outputs(state, geom, &eq)?;
    let rates = biological_rates(state, meteo.rad_par, &outputs, params)?;
    let fluxes = thermal_fluxes(state, meteo, act, geom, params)?;
    let gas = gas_transfer_coeffs(act, state, geom, params);
    let spec = speciate_carbonates(state.dic, state.h, eq.k1, eq.k2, eq.kw)?;

    let e = &params.engineering;
    let vol = state.vol;
    let dilution = act.q_d / vol;
    let pw_fraction = geom.width * geom.paddlewheel_length * outputs.depth / vol;

    let vol_dot = act.q_d - act.q_h - fluxes.v_e_dot;

    let x_alg_dot = (rates.mu_g - rates.m_resp) * state.x_alg - dilution * state.x_alg;

    let carbon_per_rate = state.x_alg * e.yield_co2 / e.molar_mass_co2;
    let co2_deficit = eq.co2_eq - spec.co2;
    let dic_dot = dilution * (e.dic_in - state.dic) - rates.p_gross * carbon_per_rate
        + rates.m_resp * carbon_per_rate
        + gas.kla_co2_eff * (eq.co2_iny - spec.co2)
        + e.k_atm_co2 * co2_deficit
        + e.k_pw_co2 * pw_fraction * co2_deficit
        + gas.strip_co2_by_o2 * co2_deficit;

    let cat_dot = dilution * (e.cat_in - state.cat);

    let oxygen_per_rate = state.x_alg * e.yield_o2 / e.molar_mass_o2;
    let o2_deficit = eq.x_o2_eq - state.x_o2;
    let x_o2_dot = dilution * o2_deficit + rates.p_gross * oxygen_per_rate - rates.m_resp * oxygen_per_rate
        + gas.kla_o2_eff * o2_deficit
        + e.k_atm_o2 * o2_deficit
        + e.k_pw_o2 * pw_fraction * o2_deficit
        - gas.strip_o2_by_co2 * state.x_o2;

    let h_dot = proton_derivative(state.dic, state.cat, state.h, dic_dot, cat_dot, eq.k1, eq.k2, eq.kw)?;

    let t = &params.thermal;
    let temp_dot = fluxes.q_sum / (t.water_density * t.water_heat_capacity * vol) - state.temp / vol * vol_dot;

    let derivative = StateVector {
        x_alg: x_alg_dot,
        x_o2: x_o2_dot,
        dic: dic_dot,
        cat: cat_dot,
        h: h_dot,
        temp: temp_dot,
        vol: vol_dot,
    };
    if derivative.to_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::Model(format!(
            "non-finite derivative {derivative:?} at {state:?}"
        )));
    }
    Ok(PlantSnapshot {
        outputs,
        equilibria: eq,
        speciation: spec,
        rates,
        fluxes,
        gas,
        derivative,
    })
}

/// Time derivative of the seven plant states.
pub fn state_derivative(
    state: &StateVector,
    meteo: &MeteoSample,
    act: &ActuatorInputs,
    geom: &ReactorGeometry,
    params: &ModelParameters,
) -> Result<StateVector> {
    evaluate_plant(state, meteo, act, geom, params).map(|s| s.derivative)
}

/// Initial condition expressed in user-facing quantities.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    /// Biomass [g·L⁻¹].
    pub x_alg_gl: f64,
    pub ph: f64,
    /// Dissolved oxygen [% sat].
    pub do_pct: f64,
    /// Strong cations [mol·m⁻³].
    pub cat: f64,
    /// Temperature [°C].
    pub temp: f64,
    /// Culture depth [m].
    pub depth: f64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        InitialConditions {
            x_alg_gl: 0.5,
            ph: 8.0,
            do_pct: 100.0,
            cat: 5.0,
            temp: 22.0,
            depth: 0.15,
        }
    }
}

impl InitialConditions {
    /// Full state vector; DIC is chosen so the charge balance holds at the requested pH.
    pub fn to_state(&self, geom: &ReactorGeometry, params: &ModelParameters) -> Result<StateVector> {
        let eq = EquilibriumSet::at(self.temp, params)?;
        let h = 1000.0 * 10f64.powf(-self.ph);
        let dic = carbonate::dic_for_proton(self.cat, h, eq.k1, eq.k2, eq.kw)?;
        let state = StateVector {
            x_alg: self.x_alg_gl * 1000.0,
            x_o2: self.do_pct / 100.0 * eq.x_o2_eq,
            dic,
            cat: self.cat,
            h,
            temp: self.temp,
            vol: geom.volume_at_depth(self.depth),
        };
        state.validate(geom.sump_volume())?;
        Ok(state)
    }
}

/// Default starting state of the benchmark.
pub fn nominal_state(geom: &ReactorGeometry, params: &ModelParameters) -> Result<StateVector> {
    InitialConditions::default().to_state(geom, params)
}
