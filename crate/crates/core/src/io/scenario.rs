//! Delimited meteorological scenario files and the synthetic clear-sky generator.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::fmt_f64;
use crate::control::SECONDS_PER_DAY;
use crate::error::{Error, Result};
use crate::model::{par_from_global, MeteoSample, StateVector};
use crate::sim::Scenario;

const REQUIRED: [&str; 5] = ["time_s", "rad_global_wm2", "temp_ext_c", "rh_pct", "wind_ms"];
const PAR_COLUMN: &str = "rad_par";

/// Parsed contents of a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    /// Seconds since midnight of the first day.
    pub time_s: Vec<f64>,
    pub samples: Vec<MeteoSample>,
    /// Whether PAR was given explicitly rather than derived from global irradiance.
    pub has_par: bool,
}

impl ScenarioFile {
    pub fn period(&self) -> f64 {
        match self.time_s.as_slice() {
            [a, b, ..] => b - a,
            _ => SECONDS_PER_DAY,
        }
    }

    /// Total time covered, each sample holding for one period.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.period()
    }

    /// Run description over `horizon` seconds (the whole file when `None`).
    pub fn to_scenario(&self, initial: StateVector, horizon: Option<f64>) -> Result<Scenario> {
        let horizon = horizon.unwrap_or_else(|| self.duration());
        if horizon > self.duration() + 1e-9 {
            return Err(Error::Scenario(format!(
                "requested horizon {horizon} s exceeds the {} s covered by the scenario",
                self.duration()
            )));
        }
        Ok(Scenario {
            period: self.period(),
            day_offset: self.time_s.first().copied().unwrap_or(0.0).rem_euclid(SECONDS_PER_DAY),
            samples: self.samples.clone(),
            initial,
            horizon,
        })
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Config(format!("scenario header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = col(name).ok_or_else(|| Error::Config(format!("scenario file is missing column '{name}'")))?;
    }
    let par_idx = col(PAR_COLUMN);

    let mut time_s = Vec::new();
    let mut samples = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| Error::Config(format!("scenario line {line}: {e}")))?;
        let get = |i: usize, name: &str| -> Result<f64> {
            let cell = rec.get(i).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::Scenario(format!("line {line}: missing value for '{name}'")));
            }
            cell.parse::<f64>()
                .map_err(|_| Error::Scenario(format!("line {line}: '{cell}' is not a number ({name})")))
        };
        let t = get(idx[0], REQUIRED[0])?;
        let rad_global = get(idx[1], REQUIRED[1])?;
        let rad_par = match par_idx {
            Some(i) => get(i, PAR_COLUMN)?,
            None => par_from_global(rad_global).map_err(|e| Error::Scenario(format!("line {line}: {e}")))?,
        };
        let s = MeteoSample {
            rad_global,
            rad_par,
            temp_ext: get(idx[2], REQUIRED[2])?,
            rh: get(idx[3], REQUIRED[3])?,
            wind: get(idx[4], REQUIRED[4])?,
        };
        s.validate().map_err(|e| Error::Scenario(format!("line {line}: {e}")))?;
        time_s.push(t);
        samples.push(s);
    }
    if samples.is_empty() {
        return Err(Error::Scenario("scenario file has no data rows".into()));
    }
    check_uniform(&time_s)?;
    Ok(ScenarioFile {
        time_s,
        samples,
        has_par: par_idx.is_some(),
    })
}

fn check_uniform(t: &[f64]) -> Result<()> {
    if t.len() < 2 {
        return Ok(());
    }
    let period = t[1] - t[0];
    if !(period > 0.0) {
        return Err(Error::Scenario("time_s must be strictly increasing".into()));
    }
    for (i, w) in t.windows(2).enumerate() {
        let d = w[1] - w[0];
        if !(d > 0.0) {
            return Err(Error::Scenario(format!(
                "time_s not strictly increasing at row {}",
                i + 2
            )));
        }
        if (d - period).abs() > 1e-9 * period.max(1.0) {
            return Err(Error::Scenario(format!(
                "non-uniform sample period at row {}: {d} s instead of {period} s",
                i + 2
            )));
        }
    }
    Ok(())
}

pub fn emit_scenario(file: &ScenarioFile) -> String {
    let mut out = REQUIRED.join(",");
    if file.has_par {
        out.push(',');
        out.push_str(PAR_COLUMN);
    }
    out.push('\n');
    for (t, s) in file.time_s.iter().zip(&file.samples) {
        let mut cells = vec![
            fmt_f64(*t),
            fmt_f64(s.rad_global),
            fmt_f64(s.temp_ext),
            fmt_f64(s.rh),
            fmt_f64(s.wind),
        ];
        if file.has_par {
            cells.push(fmt_f64(s.rad_par));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    parse_scenario(&text)
}

/// Settings of the synthetic clear-sky weather generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub days: u32,
    /// Clear-sky irradiance at solar noon [W·m⁻²].
    pub peak_rad: f64,
    /// Hour of sunrise; sunset is symmetric about noon.
    pub sunrise_hour: f64,
    pub temp_mean: f64,
    /// Half of the daily ambient temperature range [°C].
    pub temp_swing: f64,
    /// Delay of the temperature maximum after solar noon [h].
    pub temp_lag_hours: f64,
    pub rh_mean: f64,
    /// Daily humidity amplitude, in antiphase with temperature [%].
    pub rh_amplitude: f64,
    pub wind_mean: f64,
    pub wind_amplitude: f64,
    /// Relative day-to-day reduction of the peak irradiance, drawn uniformly in `[0, x)`.
    pub day_variation: f64,
    pub seed: u64,
    /// Sample period [s].
    pub period: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            days: 6,
            peak_rad: 950.0,
            sunrise_hour: 6.5,
            temp_mean: 19.0,
            temp_swing: 6.0,
            temp_lag_hours: 2.0,
            rh_mean: 60.0,
            rh_amplitude: 15.0,
            wind_mean: 2.0,
            wind_amplitude: 1.0,
            day_variation: 0.15,
            seed: 7,
            period: 300.0,
        }
    }
}

/// Clear-sky half-sine irradiance, lagged sinusoidal temperature, smooth rh and wind.
pub fn generate_synthetic_scenario(spec: &SyntheticSpec) -> Result<ScenarioFile> {
    if spec.days < 1 {
        return Err(Error::Config("synthetic scenario needs at least one day".into()));
    }
    if !(spec.period > 0.0) || SECONDS_PER_DAY % spec.period != 0.0 {
        return Err(Error::Config(format!(
            "period must divide one day, got {}",
            spec.period
        )));
    }
    if !(spec.sunrise_hour > 0.0 && spec.sunrise_hour < 12.0) || spec.peak_rad < 0.0 {
        return Err(Error::Config(
            "sunrise must lie in (0, 12) h and peak_rad be non-negative".into(),
        ));
    }
    if !(0.0..1.0).contains(&spec.day_variation) {
        return Err(Error::Config("day_variation must lie in [0, 1)".into()));
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(spec.seed);
    let factors: Vec<f64> = (0..spec.days)
        .map(|_| 1.0 - spec.day_variation * rng.random::<f64>())
        .collect();

    let per_day = (SECONDS_PER_DAY / spec.period) as usize;
    let n = per_day * spec.days as usize;
    let day_len = 24.0 - 2.0 * spec.sunrise_hour;
    let t_peak = 12.0 + spec.temp_lag_hours;
    let mut time_s = Vec::with_capacity(n);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * spec.period;
        let hour = (t % SECONDS_PER_DAY) / 3600.0;
        let day = i / per_day;
        let phase = (hour - spec.sunrise_hour) / day_len;
        let rad_global = if (0.0..=1.0).contains(&phase) {
            (spec.peak_rad * factors[day] * (PI * phase).sin()).max(0.0)
        } else {
            0.0
        };
        let diurnal = (2.0 * PI * (hour - t_peak) / 24.0).cos();
        let rh = (spec.rh_mean - spec.rh_amplitude * diurnal).clamp(0.0, 100.0);
        let wind = (spec.wind_mean + spec.wind_amplitude * (2.0 * PI * (hour - 15.0) / 24.0).cos()).max(0.0);
        time_s.push(t);
        samples.push(MeteoSample {
            rad_global,
            rad_par: par_from_global(rad_global)?,
            temp_ext: spec.temp_mean + spec.temp_swing * diurnal,
            rh,
            wind,
        });
    }
    Ok(ScenarioFile {
        time_s,
        samples,
        has_par: false,
    })
}
