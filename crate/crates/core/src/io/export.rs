//! Result export: time series, summary, run metadata and plot-ready panels.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fmt_f64;
use crate::error::{Error, Result};
use crate::evaluation::RunSummary;
use crate::model::{ReactorGeometry, StateVector};
use crate::sim::{ActuatorLimits, ResultsLog, StepRecord};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const RUN_INFO_FILE: &str = "run_info.toml";
pub const PLOT_DIR: &str = "plots";

/// Non-series content of a [`ResultsLog`], plus what evaluation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInfo {
    pub label: String,
    pub t_m: f64,
    pub controllers: [String; 4],
    pub limits: ActuatorLimits,
    pub geometry: ReactorGeometry,
    pub initial_state: StateVector,
    pub final_state: StateVector,
    pub delay_residue: Vec<[f64; 2]>,
}

impl RunInfo {
    pub fn from_log(label: &str, log: &ResultsLog, geom: &ReactorGeometry) -> Self {
        RunInfo {
            label: label.to_string(),
            t_m: log.t_m,
            controllers: log.controllers.clone(),
            limits: log.limits,
            geometry: *geom,
            initial_state: log.initial_state,
            final_state: log.final_state,
            delay_residue: log.delay_residue.iter().map(|(a, c)| [*a, *c]).collect(),
        }
    }
}

pub fn timeseries_csv(log: &ResultsLog) -> String {
    let mut out = StepRecord::FIELDS.join(",");
    out.push('\n');
    for r in &log.records {
        let row: Vec<String> = r.values().iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_timeseries(text: &str) -> Result<Vec<StepRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Evaluation("empty time-series file".into()))?;
    let names: Vec<&str> = header.split(',').collect();
    if names != StepRecord::FIELDS {
        return Err(Error::Evaluation(
            "time-series header does not match the log layout".into(),
        ));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let vals = l
                .split(',')
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|_| Error::Evaluation(format!("time-series line {}: bad number '{c}'", i + 2)))
                })
                .collect::<Result<Vec<f64>>>()?;
            StepRecord::from_values(&vals)
        })
        .collect()
}

/// `key = value` lines with costs and KPIs.
pub fn summary_text(s: &RunSummary) -> String {
    let c = &s.costs;
    let k = &s.kpis;
    let mut out = format!("label = {}\n", s.label);
    for (slot, mode) in ["ph", "do", "hd", "temp"].iter().zip(&s.modes) {
        out.push_str(&format!("controller_{slot} = {mode}\n"));
    }
    let pairs = [
        ("j_ph", c.j_ph),
        ("j_ph_sp", c.ph.j_sp),
        ("j_ph_s", c.ph.j_s),
        ("j_ph_c", c.ph.j_c),
        ("j_do", c.j_do),
        ("j_do_sp", c.do_.j_sp),
        ("j_do_s", c.do_.j_s),
        ("j_do_c", c.do_.j_c),
        ("j_temp", c.j_temp),
        ("j_temp_sp", c.temp.j_sp),
        ("j_temp_s1", c.temp.j_s1),
        ("j_temp_s2", c.temp.j_s2),
        ("j_temp_c", c.temp.j_c),
        ("j_avg", c.j_avg),
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
    ];
    for (key, v) in pairs {
        out.push_str(&format!("{key} = {}\n", fmt_f64(v)));
    }
    out
}

/// Reads a summary file back into `(key, value)` pairs.
pub fn parse_summary(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_once(" = ")
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Evaluation(format!("malformed summary line '{l}'")))
        })
        .collect()
}

fn panel(log: &ResultsLog, header: &str, cols: &[fn(&StepRecord) -> f64]) -> String {
    let mut out = format!("{header}\n");
    for r in &log.records {
        let mut row = vec![fmt_f64(r.time / 3600.0)];
        row.extend(cols.iter().map(|f| fmt_f64(f(r))));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Five panels: pH, DO, biomass, depth and temperature against time in hours.
pub fn plot_panels(log: &ResultsLog) -> Vec<(&'static str, String)> {
    vec![
        ("ph.csv", panel(log, "time_h,ph,ph_ref", &[|r| r.ph, |r| r.ph_ref])),
        (
            "do.csv",
            panel(log, "time_h,do_pct,do_ref", &[|r| r.do_pct, |r| r.do_ref]),
        ),
        ("biomass.csv", panel(log, "time_h,x_alg_gl", &[|r| r.x_alg_gl])),
        ("depth.csv", panel(log, "time_h,depth", &[|r| r.depth])),
        (
            "temperature.csv",
            panel(
                log,
                "time_h,temp,temp_ref,temp_ext",
                &[|r| r.temp, |r| r.temp_ref, |r| r.temp_ext],
            ),
        ),
    ]
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes every artefact of a run into `dir`.
pub fn export_results(
    log: &ResultsLog,
    summary: &RunSummary,
    geom: &ReactorGeometry,
    dir: impl AsRef<Path>,
) -> Result<()> {
    let dir = dir.as_ref();
    let plots = dir.join(PLOT_DIR);
    fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
    write(&dir.join(TIMESERIES_FILE), &timeseries_csv(log))?;
    write(&dir.join(SUMMARY_FILE), &summary_text(summary))?;
    let info = RunInfo::from_log(&summary.label, log, geom);
    let info_text = toml::to_string(&info).map_err(|e| Error::Evaluation(format!("run info: {e}")))?;
    write(&dir.join(RUN_INFO_FILE), &info_text)?;
    for (name, text) in plot_panels(log) {
        write(&plots.join(name), &text)?;
    }
    Ok(())
}

/// Rebuilds a log from an export directory.
pub fn load_results(dir: impl AsRef<Path>) -> Result<(ResultsLog, RunInfo)> {
    let dir = dir.as_ref();
    let read = |name: &str| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
    };
    let info: RunInfo =
        toml::from_str(&read(RUN_INFO_FILE)?).map_err(|e| Error::Evaluation(format!("run info: {e}")))?;
    let records = parse_timeseries(&read(TIMESERIES_FILE)?)?;
    let log = ResultsLog {
        t_m: info.t_m,
        limits: info.limits,
        controllers: info.controllers.clone(),
        records,
        initial_state: info.initial_state,
        final_state: info.final_state,
        delay_residue: info.delay_residue.iter().map(|p| (p[0], p[1])).collect(),
    };
    Ok((log, info))
}
