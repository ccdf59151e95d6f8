//! Python bindings: load weather, run the closed loop, score and export results.
//!
//! Controller slots accept either a mode name or a Python callable
//! `f(ctx: dict, signals: dict) -> None` that edits `signals` in place.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::path::PathBuf;
use std::rc::Rc;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use raceway_core::control::{
    build_controllers, ControlContext, ControlSignals, Controller, ControllerSelection, ControllerSettings,
};
use raceway_core::evaluation::{comparison_table, compute_kpis, summarize, CostWeights, RunSummary};
use raceway_core::io::export::summary_text;
use raceway_core::io::{
    default_parameters, emit_parameters, emit_scenario, export_results, generate_synthetic_scenario, load_manifest,
    load_parameters, load_results, load_scenario, parse_parameters, parse_scenario, ParameterSet, PreparedRun,
    ScenarioFile, SyntheticSpec,
};
use raceway_core::model::{dissociation_constants, speciate_carbonates, InitialConditions};
use raceway_core::sim::{run_simulation, ActuatorLimits, ResultsLog, SimConfig, StepRecord};
use raceway_core::Error;

create_exception!(
    raceway,
    RacewayError,
    PyException,
    "Raised for any benchmark failure; `exit_code` matches the CLI."
);

fn py_err(e: Error) -> PyErr {
    let code = e.exit_code();
    let err = RacewayError::new_err(e.to_string());
    Python::attach(|py| {
        let _ = err.value(py).setattr("exit_code", code);
    });
    err
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for raceway_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Geometry and model constants.
#[pyclass(name = "Parameters", module = "raceway", from_py_object)]
#[derive(Clone)]
struct PyParameters {
    inner: ParameterSet,
}

#[pymethods]
impl PyParameters {
    #[new]
    fn new() -> Self {
        PyParameters {
            inner: default_parameters(),
        }
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyParameters {
            inner: load_parameters(path).py()?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyParameters {
            inner: parse_parameters(text).py()?,
        })
    }

    fn to_toml(&self) -> PyResult<String> {
        emit_parameters(&self.inner).py()
    }

    /// Free-surface area [m²].
    #[getter]
    fn area(&self) -> f64 {
        self.inner.geometry.area()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Sampled weather for a run.
#[pyclass(name = "Scenario", module = "raceway", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: ScenarioFile,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyScenario {
            inner: load_scenario(path).py()?,
        })
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(PyScenario {
            inner: parse_scenario(text).py()?,
        })
    }

    /// Clear-sky weather; keyword arguments override the generator defaults.
    #[staticmethod]
    #[pyo3(signature = (days=6, seed=7, peak_rad=None, temp_mean=None, temp_swing=None, period=None))]
    fn synthetic(
        days: u32,
        seed: u64,
        peak_rad: Option<f64>,
        temp_mean: Option<f64>,
        temp_swing: Option<f64>,
        period: Option<f64>,
    ) -> PyResult<Self> {
        let d = SyntheticSpec::default();
        let spec = SyntheticSpec {
            days,
            seed,
            peak_rad: peak_rad.unwrap_or(d.peak_rad),
            temp_mean: temp_mean.unwrap_or(d.temp_mean),
            temp_swing: temp_swing.unwrap_or(d.temp_swing),
            period: period.unwrap_or(d.period),
            ..d
        };
        Ok(PyScenario {
            inner: generate_synthetic_scenario(&spec).py()?,
        })
    }

    fn to_csv(&self) -> String {
        emit_scenario(&self.inner)
    }

    /// Covered time span [s].
    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }
}

/// Trajectory and geometry of a finished run.
#[pyclass(name = "Results", module = "raceway")]
struct PyResults {
    log: ResultsLog,
    params: ParameterSet,
}

impl PyResults {
    fn summary_of(&self, label: &str) -> PyResult<RunSummary> {
        summarize(label, &self.log, &self.params.geometry, &CostWeights::default()).py()
    }
}

#[pymethods]
impl PyResults {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (log, info) = load_results(path).py()?;
        let params = ParameterSet {
            geometry: info.geometry,
            ..default_parameters()
        };
        Ok(PyResults { log, params })
    }

    #[classattr]
    fn fields() -> Vec<&'static str> {
        StepRecord::FIELDS.to_vec()
    }

    fn __len__(&self) -> usize {
        self.log.len()
    }

    /// Controller names in slot order (pH, DO, harvest/dilution, temperature).
    #[getter]
    fn controllers(&self) -> Vec<String> {
        self.log.controllers.to_vec()
    }

    /// One logged quantity per step.
    fn series(&self, name: &str) -> PyResult<Vec<f64>> {
        let i = StepRecord::FIELDS
            .iter()
            .position(|f| *f == name)
            .ok_or_else(|| py_err(Error::Config(format!("unknown field '{name}'"))))?;
        Ok(self.log.records.iter().map(|r| r.values()[i]).collect())
    }

    /// Every logged quantity, keyed by field name.
    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (i, f) in StepRecord::FIELDS.iter().enumerate() {
            let col: Vec<f64> = self.log.records.iter().map(|r| r.values()[i]).collect();
            d.set_item(f, col)?;
        }
        Ok(d)
    }

    fn kpis<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let k = compute_kpis(&self.log, &self.params.geometry).py()?;
        let d = PyDict::new(py);
        for (name, v) in [
            ("total_air_l", k.total_air_l),
            ("total_co2_l", k.total_co2_l),
            ("harvested_g", k.harvested_g),
            ("x0_g", k.x0_g),
            ("xf_g", k.xf_g),
            ("biomass_produced_g", k.biomass_produced_g),
            ("prod_areal", k.prod_areal),
            ("yield_pct", k.yield_pct),
            ("harv_areal", k.harv_areal),
            ("accum_rel_pct", k.accum_rel_pct),
        ] {
            d.set_item(name, v)?;
        }
        Ok(d)
    }

    /// Unnormalised loop costs.
    fn costs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = self.summary_of("run")?.costs;
        let d = PyDict::new(py);
        d.set_item("j_ph", c.j_ph)?;
        d.set_item("j_do", c.j_do)?;
        d.set_item("j_temp", c.j_temp)?;
        d.set_item("j_avg", c.j_avg)?;
        Ok(d)
    }

    #[pyo3(signature = (label="run"))]
    fn summary(&self, label: &str) -> PyResult<String> {
        Ok(summary_text(&self.summary_of(label)?))
    }

    #[pyo3(signature = (path, label="run"))]
    fn export(&self, path: PathBuf, label: &str) -> PyResult<()> {
        let s = self.summary_of(label)?;
        export_results(&self.log, &s, &self.params.geometry, path).py()
    }
}

/// Adapts a Python callable to a controller slot.
struct PyController {
    name: String,
    f: Py<PyAny>,
    failure: Rc<RefCell<Option<PyErr>>>,
}

const SIGNALS: [&str; 6] = ["q_co2", "q_air", "q_d_cmd", "q_h_cmd", "q_w", "t_in_hx"];

fn signal_slots(s: &mut ControlSignals) -> [&mut f64; 6] {
    [
        &mut s.q_co2,
        &mut s.q_air,
        &mut s.q_d_cmd,
        &mut s.q_h_cmd,
        &mut s.q_w,
        &mut s.t_in_hx,
    ]
}

impl PyController {
    fn call(&self, py: Python<'_>, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> PyResult<()> {
        let c = PyDict::new(py);
        let t = &ctx.timeline;
        c.set_item("index", t.index)?;
        c.set_item("time", t.time)?;
        c.set_item("dt", t.dt)?;
        c.set_item("hour", t.hour)?;
        c.set_item("min", t.min)?;
        c.set_item("ph", ctx.obs.ph)?;
        c.set_item("do", ctx.obs.do_pct)?;
        c.set_item("temp", ctx.obs.temp)?;
        c.set_item("depth", ctx.obs.depth)?;
        c.set_item("x_alg", ctx.obs.x_alg_gl)?;
        c.set_item("ph_ref", ctx.refs.ph_ref)?;
        c.set_item("do_ref", ctx.refs.do_ref)?;
        c.set_item("temp_ref", ctx.refs.temp_ref)?;
        c.set_item("rad_global", ctx.env.rad_global)?;
        c.set_item("temp_ext", ctx.env.temp_ext)?;
        c.set_item("rh", ctx.env.rh)?;
        c.set_item("wind", ctx.env.wind)?;
        let sig = PyDict::new(py);
        for (k, v) in SIGNALS.iter().zip(signal_slots(s)) {
            sig.set_item(k, *v)?;
        }
        self.f.bind(py).call1((c, &sig))?;
        for (k, v) in SIGNALS.iter().zip(signal_slots(s)) {
            if let Some(x) = sig.get_item(k)? {
                *v = x.extract()?;
            }
        }
        Ok(())
    }
}

impl Controller for PyController {
    fn name(&self) -> &str {
        &self.name
    }

    fn step(&mut self, ctx: &ControlContext<'_>, s: &mut ControlSignals) -> raceway_core::Result<()> {
        Python::attach(|py| self.call(py, ctx, s)).map_err(|e| {
            let msg = format!("{}: {e}", self.name);
            *self.failure.borrow_mut() = Some(e);
            Error::Controller {
                step: ctx.timeline.index,
                msg,
            }
        })
    }
}

/// A slot argument: absent, a mode name, or a callable.
fn slot_mode(arg: Option<&Bound<'_, PyAny>>) -> PyResult<Option<String>> {
    match arg {
        Some(a) if !a.is_callable() => Ok(Some(a.extract()?)),
        _ => Ok(None),
    }
}

fn py_slot(arg: Option<&Bound<'_, PyAny>>, failure: &Rc<RefCell<Option<PyErr>>>) -> Option<Box<dyn Controller>> {
    let arg = arg.filter(|a| a.is_callable())?;
    let name = arg
        .getattr("__name__")
        .and_then(|n| n.extract::<String>())
        .unwrap_or_else(|_| "python".into());
    Some(Box::new(PyController {
        name,
        f: arg.clone().unbind(),
        failure: Rc::clone(failure),
    }))
}

/// Simulates one configuration.
///
/// Slots left out use the baseline controllers. `days` truncates the
/// scenario; `tol` sets the relative integrator tolerance, with absolute
/// tolerances scaled alongside.
#[pyfunction]
#[pyo3(signature = (scenario, *, ph=None, r#do=None, hd=None, temp=None, params=None, days=None, tol=None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    scenario: &PyScenario,
    ph: Option<&Bound<'_, PyAny>>,
    r#do: Option<&Bound<'_, PyAny>>,
    hd: Option<&Bound<'_, PyAny>>,
    temp: Option<&Bound<'_, PyAny>>,
    params: Option<PyParameters>,
    days: Option<f64>,
    tol: Option<f64>,
) -> PyResult<PyResults> {
    let params = params.map(|p| p.inner).unwrap_or_else(default_parameters);
    let model = params.model();
    let geom = &params.geometry;

    let mut sel = ControllerSelection::PLAYER_1;
    if let Some(m) = slot_mode(ph)? {
        sel.ph = m.parse().py()?;
    }
    if let Some(m) = slot_mode(r#do)? {
        sel.do_ = m.parse().py()?;
    }
    if let Some(m) = slot_mode(hd)? {
        sel.hd = m.parse().py()?;
    }
    if let Some(m) = slot_mode(temp)? {
        sel.temp = m.parse().py()?;
    }
    let limits = ActuatorLimits::default();
    let mut cfg = SimConfig::default();
    if let Some(tol) = tol {
        if !(tol > 0.0) {
            return Err(py_err(Error::Config(format!("tolerance must be positive, got {tol}"))));
        }
        cfg.integrator = cfg.integrator.scaled(tol / cfg.integrator.rel_tol);
    }
    let mut set = build_controllers(&sel, &ControllerSettings::default(), &limits, geom, &model).py()?;
    let failure = Rc::new(RefCell::new(None));
    for (arg, slot) in [
        (ph, &mut set.ph),
        (r#do, &mut set.do_),
        (hd, &mut set.hd),
        (temp, &mut set.temp),
    ] {
        if let Some(c) = py_slot(arg, &failure) {
            *slot = c;
        }
    }

    let initial = InitialConditions::default().to_state(geom, &model).py()?;
    let horizon = days.map(|d| (d * 86_400.0 / cfg.t_m).round() * cfg.t_m);
    let sc = scenario.inner.to_scenario(initial, horizon).py()?;
    let out = run_simulation(&sc, &mut set, &limits, &cfg, &model, geom);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    Ok(PyResults { log: out.py()?, params })
}

/// Runs a TOML run manifest (paths resolve relative to the file).
#[pyfunction]
fn run_manifest(py: Python<'_>, path: PathBuf) -> PyResult<PyResults> {
    let run = PreparedRun::load(load_manifest(path).py()?).py()?;
    let log = py.detach(|| run.execute()).py()?;
    Ok(PyResults {
        log,
        params: run.params,
    })
}

/// Side-by-side table of several runs, costs normalised to the first.
#[pyfunction]
fn compare(runs: &Bound<'_, PyList>, labels: Vec<String>) -> PyResult<String> {
    if runs.len() != labels.len() {
        return Err(py_err(Error::Config("need one label per run".into())));
    }
    let mut summaries = Vec::with_capacity(labels.len());
    for (r, l) in runs.iter().zip(&labels) {
        let r = r.cast::<PyResults>()?.borrow();
        summaries.push(r.summary_of(l)?);
    }
    comparison_table(&summaries).py()
}

/// Carbonate species [mol·m⁻³] at the given DIC, pH and temperature.
#[pyfunction]
#[pyo3(signature = (dic, ph, temp, params=None))]
fn speciate<'py>(
    py: Python<'py>,
    dic: f64,
    ph: f64,
    temp: f64,
    params: Option<PyParameters>,
) -> PyResult<Bound<'py, PyDict>> {
    let model = params.map(|p| p.inner).unwrap_or_else(default_parameters).model();
    let (k1, k2, kw) = dissociation_constants(temp, &model).py()?;
    let s = speciate_carbonates(dic, 1000.0 * 10f64.powf(-ph), k1, k2, kw).py()?;
    let d = PyDict::new(py);
    d.set_item("co2", s.co2)?;
    d.set_item("hco3", s.hco3)?;
    d.set_item("co3", s.co3)?;
    d.set_item("oh", s.oh)?;
    Ok(d)
}

#[pymodule]
fn raceway(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RacewayError", m.py().get_type::<RacewayError>())?;
    m.add_class::<PyParameters>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyResults>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_manifest, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(speciate, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::types::PyModule;

    fn with_module(code: &std::ffi::CStr) -> PyResult<()> {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "raceway")?;
            raceway(&m)?;
            py.import("sys")?.getattr("modules")?.set_item("raceway", &m)?;
            let globals = PyDict::new(py);
            globals.set_item("ASSETS", concat!(env!("CARGO_MANIFEST_DIR"), "/../core/assets"))?;
            py.run(code, Some(&globals), None)
        })
    }

    #[test]
    fn python_controller_drives_the_plant() {
        with_module(
            cr#"
import raceway
w = raceway.Scenario.synthetic(days=1)
seen = []
def air(ctx, s):
    seen.append(ctx["hour"])
    s["q_air"] = 0.01 if ctx["do"] > ctx["do_ref"] else 0.0
r = raceway.simulate(w, do=air, days=0.5)
assert len(seen) == len(r) == 720, len(seen)
assert r.controllers == ["ph-onoff", "air", "hd-fixed", "temp-none"]
# commands above the blower capacity are saturated
assert set(r.series("q_air_cmd")) == {0.0, 500.0 / 60000.0}
"#,
        )
        .unwrap();
    }

    #[test]
    fn errors_carry_exit_codes() {
        with_module(
            cr#"
import raceway
try:
    raceway.Scenario.load(ASSETS + "/missing.csv")
except raceway.RacewayError as e:
    assert e.exit_code == 6
else:
    raise AssertionError
def bad(ctx, s):
    s["q_d_cmd"] = 0.5
try:
    raceway.simulate(raceway.Scenario.synthetic(days=1), hd=bad, days=0.1)
except raceway.RacewayError as e:
    assert e.exit_code == 4 and "q_d_cmd" in str(e)
else:
    raise AssertionError
"#,
        )
        .unwrap();
    }
}
