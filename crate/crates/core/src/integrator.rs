//! Stiff integration of the plant over one macro-step with inputs held constant.
//!
//! The scheme is the three-stage Radau IIA collocation method (order 5, L-stable,
//! stiffly accurate) solved by simplified Newton iterations on a finite-difference
//! Jacobian. Local errors are estimated by step doubling.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    state_derivative, ActuatorInputs, MeteoSample, ModelParameters, ReactorGeometry, StateVector, N_STATES,
};

const SQRT6: f64 = 2.449_489_742_783_178;

/// Radau IIA collocation matrix.
const RADAU_A: [[f64; 3]; 3] = [
    [
        (88.0 - 7.0 * SQRT6) / 360.0,
        (296.0 - 169.0 * SQRT6) / 1800.0,
        (-2.0 + 3.0 * SQRT6) / 225.0,
    ],
    [
        (296.0 + 169.0 * SQRT6) / 1800.0,
        (88.0 + 7.0 * SQRT6) / 360.0,
        (-2.0 - 3.0 * SQRT6) / 225.0,
    ],
    [(16.0 - SQRT6) / 36.0, (16.0 + SQRT6) / 36.0, 1.0 / 9.0],
];

/// Classical order of the scheme, used by the step-size controller.
const ORDER: i32 = 5;
const NEWTON_MAX_ITER: usize = 10;
const NEWTON_TOL: f64 = 1e-3;

/// Sign constraint attached to each solution component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Free,
    /// Small undershoots (within the absolute tolerance) are clamped to zero.
    NonNegative,
    /// Must stay strictly positive; steps that cross zero are rejected.
    Positive,
}

/// Right-hand side of an autonomous ODE system.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

/// Tolerances and step bounds of the stiff solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    /// Absolute tolerance for biomass, O2, DIC and cations.
    pub abs_tol_concentration: f64,
    /// Absolute tolerance for the proton concentration.
    pub abs_tol_proton: f64,
    pub abs_tol_temp: f64,
    pub abs_tol_volume: f64,
    pub min_substep: f64,
    pub max_substep: f64,
    pub max_substeps_per_macro: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-6,
            abs_tol_concentration: 1e-9,
            abs_tol_proton: 1e-14,
            abs_tol_temp: 1e-6,
            abs_tol_volume: 1e-6,
            min_substep: 1e-6,
            max_substep: 60.0,
            max_substeps_per_macro: 20_000,
        }
    }
}

impl IntegratorConfig {
    /// Per-state absolute tolerances in [`StateVector`] order.
    pub fn abs_tol(&self) -> [f64; N_STATES] {
        let c = self.abs_tol_concentration;
        [c, c, c, c, self.abs_tol_proton, self.abs_tol_temp, self.abs_tol_volume]
    }

    /// Same configuration with every tolerance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        IntegratorConfig {
            rel_tol: self.rel_tol * factor,
            abs_tol_concentration: self.abs_tol_concentration * factor,
            abs_tol_proton: self.abs_tol_proton * factor,
            abs_tol_temp: self.abs_tol_temp * factor,
            abs_tol_volume: self.abs_tol_volume * factor,
            ..self.clone()
        }
    }

    pub fn validate(&self, t_m: f64) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Config(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.abs_tol().iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Config("absolute tolerances must be positive".into()));
        }
        if !(self.min_substep > 0.0 && self.min_substep <= self.max_substep && self.max_substep <= t_m) {
            return Err(Error::Config(format!(
                "need 0 < min_substep <= max_substep <= T_m, got {} / {} / {t_m}",
                self.min_substep, self.max_substep
            )));
        }
        if self.max_substeps_per_macro == 0 {
            return Err(Error::Config("max_substeps_per_macro must be positive".into()));
        }
        Ok(())
    }
}

/// Why a solve stopped early, with the last accepted solution.
#[derive(Debug, Clone)]
pub struct SolveFailure {
    pub msg: String,
    pub y: Vec<f64>,
}

/// Adaptive Radau IIA solver. Keeps the last accepted step size between calls.
#[derive(Debug, Clone)]
pub struct RadauSolver {
    pub rel_tol: f64,
    pub abs_tol: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
    last_step: Option<f64>,
}

enum StepError {
    /// Newton failed or the model rejected an iterate; retry with a smaller step.
    Retry,
}

impl RadauSolver {
    pub fn new(rel_tol: f64, abs_tol: Vec<f64>, min_step: f64, max_step: f64, max_steps: usize) -> Self {
        let n = abs_tol.len();
        RadauSolver {
            rel_tol,
            abs_tol,
            constraints: vec![Constraint::Free; n],
            min_step,
            max_step,
            max_steps,
            last_step: None,
        }
    }

    pub fn with_constraints(mut self, constraints: Vec<Constraint>) -> Self {
        assert_eq!(constraints.len(), self.abs_tol.len());
        self.constraints = constraints;
        self
    }

    /// Forget the step-size history.
    pub fn reset(&mut self) {
        self.last_step = None;
    }

    fn scale(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter()
            .zip(b)
            .zip(&self.abs_tol)
            .map(|((x, y), atol)| atol + self.rel_tol * x.abs().max(y.abs()))
            .collect()
    }

    fn jacobian<S: OdeSystem>(&self, sys: &S, y: &[f64], f0: &[f64]) -> Result<DMatrix<f64>> {
        let n = y.len();
        let mut jac = DMatrix::zeros(n, n);
        let mut yp = y.to_vec();
        let mut fp = vec![0.0; n];
        for j in 0..n {
            let delta = f64::EPSILON.sqrt() * y[j].abs().max(1e-8);
            yp[j] = y[j] + delta;
            let mut used = delta;
            if sys.rhs(&yp, &mut fp).is_err() {
                yp[j] = y[j] - delta;
                used = -delta;
                sys.rhs(&yp, &mut fp)?;
            }
            for i in 0..n {
                jac[(i, j)] = (fp[i] - f0[i]) / used;
            }
            yp[j] = y[j];
        }
        Ok(jac)
    }

    /// One Radau IIA step of size `h` from `y`.
    fn radau_step<S: OdeSystem>(
        &self,
        sys: &S,
        y: &[f64],
        h: f64,
        jac: &DMatrix<f64>,
    ) -> std::result::Result<Vec<f64>, StepError> {
        let n = y.len();
        let m = 3 * n;
        let mut mat = DMatrix::<f64>::identity(m, m);
        for i in 0..3 {
            for j in 0..3 {
                let c = h * RADAU_A[i][j];
                for r in 0..n {
                    for s in 0..n {
                        mat[(i * n + r, j * n + s)] -= c * jac[(r, s)];
                    }
                }
            }
        }
        let lu = mat.lu();
        let scale = self.scale(y, y);

        let mut z = vec![0.0; m];
        let mut stage = vec![0.0; n];
        let mut f = vec![0.0; m];
        let mut prev_norm = f64::INFINITY;
        for iter in 0..NEWTON_MAX_ITER {
            for i in 0..3 {
                for r in 0..n {
                    stage[r] = y[r] + z[i * n + r];
                }
                sys.rhs(&stage, &mut f[i * n..(i + 1) * n])
                    .map_err(|_| StepError::Retry)?;
            }
            let mut rhs = DVector::<f64>::zeros(m);
            for i in 0..3 {
                for r in 0..n {
                    let mut acc = 0.0;
                    for j in 0..3 {
                        acc += RADAU_A[i][j] * f[j * n + r];
                    }
                    rhs[i * n + r] = -z[i * n + r] + h * acc;
                }
            }
            let dz = lu.solve(&rhs).ok_or(StepError::Retry)?;
            let mut sq = 0.0;
            for k in 0..m {
                z[k] += dz[k];
                let w = dz[k] / scale[k % n];
                sq += w * w;
            }
            let norm = (sq / m as f64).sqrt();
            if !norm.is_finite() {
                return Err(StepError::Retry);
            }
            if norm <= NEWTON_TOL {
                break;
            }
            if iter > 0 {
                let theta = norm / prev_norm;
                if theta >= 1.0 {
                    return Err(StepError::Retry);
                }
                if theta / (1.0 - theta) * norm <= NEWTON_TOL {
                    break;
                }
            }
            if iter + 1 == NEWTON_MAX_ITER {
                return Err(StepError::Retry);
            }
            prev_norm = norm;
        }
        // stiffly accurate: the last stage is the new solution
        Ok((0..n).map(|r| y[r] + z[2 * n + r]).collect())
    }

    /// Applies the sign constraints; `false` means the step must be rejected.
    fn enforce_constraints(&self, y: &mut [f64]) -> bool {
        for ((v, c), atol) in y.iter_mut().zip(&self.constraints).zip(&self.abs_tol) {
            match c {
                Constraint::Free => {}
                Constraint::NonNegative => {
                    if *v < 0.0 {
                        if *v >= -atol {
                            *v = 0.0;
                        } else {
                            return false;
                        }
                    }
                }
                Constraint::Positive => {
                    if !(*v > 0.0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Advances `y0` by `span` time units.
    pub fn integrate<S: OdeSystem>(
        &mut self,
        sys: &S,
        y0: &[f64],
        span: f64,
    ) -> std::result::Result<Vec<f64>, SolveFailure> {
        let n = sys.dim();
        assert_eq!(y0.len(), n);
        let fail = |msg: String, y: &[f64]| SolveFailure { msg, y: y.to_vec() };

        let mut y = y0.to_vec();
        let mut t = 0.0;
        let mut h = self.last_step.unwrap_or(self.max_step).min(self.max_step).min(span);
        let mut f0 = vec![0.0; n];
        sys.rhs(&y, &mut f0).map_err(|e| fail(e.to_string(), &y))?;
        let mut jac = self.jacobian(sys, &y, &f0).map_err(|e| fail(e.to_string(), &y))?;
        let mut jac_fresh = true;
        let mut steps = 0;

        while t < span {
            if steps >= self.max_steps {
                return Err(fail(format!("exceeded {} substeps", self.max_steps), &y));
            }
            steps += 1;
            let remaining = span - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let h_try = if last { remaining } else { h };

            let attempt = self.radau_step(sys, &y, h_try, &jac).and_then(|big| {
                let half = 0.5 * h_try;
                let mid = self.radau_step(sys, &y, half, &jac)?;
                let small = self.radau_step(sys, &mid, half, &jac)?;
                Ok((big, small))
            });

            let (big, mut small) = match attempt {
                Ok(v) => v,
                Err(StepError::Retry) => {
                    if !jac_fresh {
                        sys.rhs(&y, &mut f0).map_err(|e| fail(e.to_string(), &y))?;
                        jac = self.jacobian(sys, &y, &f0).map_err(|e| fail(e.to_string(), &y))?;
                        jac_fresh = true;
                    } else {
                        h = 0.5 * h_try;
                    }
                    if h < self.min_step {
                        return Err(fail(format!("step size underflow at t = {t} (Newton failure)"), &y));
                    }
                    continue;
                }
            };

            let scale = self.scale(&y, &small);
            let err = (big
                .iter()
                .zip(&small)
                .zip(&scale)
                .map(|((a, b), s)| ((a - b) / s).powi(2))
                .sum::<f64>()
                / n as f64)
                .sqrt()
                / f64::from(2i32.pow(ORDER as u32) - 1);

            let feasible = err.is_finite() && self.enforce_constraints(&mut small);
            let factor = if err > 0.0 && err.is_finite() {
                (0.9 * err.powf(-1.0 / f64::from(ORDER + 1))).clamp(0.2, 5.0)
            } else if err == 0.0 {
                5.0
            } else {
                0.2
            };

            if feasible && err <= 1.0 {
                t = if last { span } else { t + h_try };
                y = small;
                // keep the unclipped proposal for the next macro-step
                h = (h_try * factor).min(self.max_step);
                if last {
                    self.last_step = Some(h.max(h_try).min(self.max_step));
                }
                jac_fresh = false;
            } else {
                h = h_try * if feasible { factor.min(0.9) } else { 0.25 };
                if h < self.min_step {
                    return Err(fail(format!("step size underflow at t = {t} (error {err:.3e})"), &y));
                }
            }
        }
        Ok(y)
    }

    /// A single fixed step without error control; exposed for convergence studies.
    pub fn fixed_step<S: OdeSystem>(&self, sys: &S, y: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut f0 = vec![0.0; y.len()];
        sys.rhs(y, &mut f0)?;
        let jac = self.jacobian(sys, y, &f0)?;
        self.radau_step(sys, y, h, &jac)
            .map_err(|_| Error::Model("Newton iteration failed in fixed step".into()))
    }
}

/// The plant with frozen disturbances and actuators.
pub struct FrozenPlant<'a> {
    pub meteo: &'a MeteoSample,
    pub act: &'a ActuatorInputs,
    pub geom: &'a ReactorGeometry,
    pub params: &'a ModelParameters,
}

impl OdeSystem for FrozenPlant<'_> {
    fn dim(&self) -> usize {
        N_STATES
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let s = StateVector::from_array(y);
        let d = state_derivative(&s, self.meteo, self.act, self.geom, self.params)?;
        dy.copy_from_slice(&d.to_array());
        Ok(())
    }
}

fn plant_constraints() -> Vec<Constraint> {
    use Constraint::*;
    vec![
        NonNegative,
        NonNegative,
        NonNegative,
        NonNegative,
        Positive,
        Free,
        Positive,
    ]
}

/// Integration workspace for one simulation run.
#[derive(Debug, Clone)]
pub struct PlantIntegrator {
    cfg: IntegratorConfig,
    solver: RadauSolver,
}

impl PlantIntegrator {
    pub fn new(cfg: IntegratorConfig) -> Self {
        let solver = RadauSolver::new(
            cfg.rel_tol,
            cfg.abs_tol().to_vec(),
            cfg.min_substep,
            cfg.max_substep,
            cfg.max_substeps_per_macro,
        )
        .with_constraints(plant_constraints());
        PlantIntegrator { cfg, solver }
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    /// State after `t_m` seconds with constant disturbances and actuators.
    pub fn advance(
        &mut self,
        state: &StateVector,
        meteo: &MeteoSample,
        act: &ActuatorInputs,
        geom: &ReactorGeometry,
        params: &ModelParameters,
        t_m: f64,
    ) -> Result<StateVector> {
        if !(t_m > 0.0) {
            return Err(Error::Config(format!("macro-step must be positive, got {t_m}")));
        }
        let plant = FrozenPlant {
            meteo,
            act,
            geom,
            params,
        };
        let mut probe = [0.0; N_STATES];
        plant.rhs(&state.to_array(), &mut probe)?;
        let y = self
            .solver
            .integrate(&plant, &state.to_array(), t_m)
            .map_err(|f| Error::Integration {
                msg: f.msg,
                state: Box::new(StateVector::from_array(&f.y)),
            })?;
        Ok(StateVector::from_array(&y))
    }
}

/// One macro-step with a fresh workspace.
pub fn integrate_macro_step(
    state: &StateVector,
    meteo: &MeteoSample,
    act: &ActuatorInputs,
    geom: &ReactorGeometry,
    params: &ModelParameters,
    t_m: f64,
    cfg: &IntegratorConfig,
) -> Result<StateVector> {
    PlantIntegrator::new(cfg.clone()).advance(state, meteo, act, geom, params, t_m)
}
