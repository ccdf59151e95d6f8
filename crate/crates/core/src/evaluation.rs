//! Dynamic cost indices and production KPIs of a finished run.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::control::SECONDS_PER_DAY;
use crate::error::{Error, Result};
use crate::model::ReactorGeometry;
use crate::sim::ResultsLog;

/// `Σ |y_ref − y| / y_ref`.
pub fn cost_tracking(y: &[f64], y_ref: &[f64]) -> Result<f64> {
    check_lengths(y, y_ref)?;
    y.iter()
        .zip(y_ref)
        .map(|(y, r)| nonzero_ref(*r).map(|r| (r - y).abs() / r.abs()))
        .sum()
}

/// Tracking cost counting only excursions above the reference.
pub fn cost_tracking_upper(y: &[f64], y_ref: &[f64]) -> Result<f64> {
    check_lengths(y, y_ref)?;
    y.iter()
        .zip(y_ref)
        .map(|(y, r)| nonzero_ref(*r).map(|r| (y - r).max(0.0) / r.abs()))
        .sum()
}

fn check_lengths(y: &[f64], y_ref: &[f64]) -> Result<()> {
    if y.len() != y_ref.len() {
        return Err(Error::Evaluation(format!(
            "series lengths differ: {} vs {}",
            y.len(),
            y_ref.len()
        )));
    }
    Ok(())
}

fn nonzero_ref(r: f64) -> Result<f64> {
    if r == 0.0 || !r.is_finite() {
        return Err(Error::Evaluation(format!(
            "reference must be finite and nonzero, got {r}"
        )));
    }
    Ok(r)
}

/// `Σ ((u(k) − u(k−1)) / (u_max − u_min))²`.
pub fn cost_smoothness(u: &[f64], u_min: f64, u_max: f64) -> Result<f64> {
    if !(u_max > u_min) {
        return Err(Error::Evaluation(format!("need u_max > u_min, got {u_min} / {u_max}")));
    }
    let span = u_max - u_min;
    Ok(u.windows(2).map(|w| ((w[1] - w[0]) / span).powi(2)).sum())
}

/// `Σ u(k) / u_max`.
pub fn cost_consumption(u: &[f64], u_max: f64) -> Result<f64> {
    if !(u_max > 0.0) {
        return Err(Error::Evaluation(format!("u_max must be positive, got {u_max}")));
    }
    Ok(u.iter().map(|v| v / u_max).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopWeights {
    pub w_sp: f64,
    pub w_s: f64,
    pub w_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TempWeights {
    pub w_sp: f64,
    /// Smoothness of the coil flow.
    pub w_s1: f64,
    /// Smoothness of the inlet temperature.
    pub w_s2: f64,
    pub w_c: f64,
}

/// Weights of the benchmark edition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostWeights {
    pub ph: LoopWeights,
    #[serde(rename = "do")]
    pub do_: LoopWeights,
    pub temp: TempWeights,
    /// Penalise DO below its reference too (default: only the excess counts).
    pub do_symmetric: bool,
}

impl Default for CostWeights {
    fn default() -> Self {
        let lw = LoopWeights {
            w_sp: 1.0,
            w_s: 0.25,
            w_c: 0.25,
        };
        CostWeights {
            ph: lw,
            do_: lw,
            temp: TempWeights {
                w_sp: 1.0,
                w_s1: 0.125,
                w_s2: 0.125,
                w_c: 0.25,
            },
            do_symmetric: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopCost {
    pub j_sp: f64,
    pub j_s: f64,
    pub j_c: f64,
    pub j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempLoopCost {
    pub j_sp: f64,
    pub j_s1: f64,
    pub j_s2: f64,
    pub j_c: f64,
    pub j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopCostReport {
    pub ph: LoopCost,
    #[serde(rename = "do")]
    pub do_: LoopCost,
    pub temp: TempLoopCost,
    pub j_ph: f64,
    pub j_do: f64,
    pub j_temp: f64,
    pub j_avg: f64,
}

/// Loop indices relative to a baseline run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCosts {
    pub j_ph: f64,
    pub j_do: f64,
    pub j_temp: f64,
    /// Mean of the three normalised loop indices.
    pub j_avg: f64,
}

fn loop_cost(j_sp: f64, u: &[f64], u_max: f64, w: &LoopWeights) -> Result<LoopCost> {
    let j_s = cost_smoothness(u, 0.0, u_max)?;
    let j_c = cost_consumption(u, u_max)?;
    Ok(LoopCost {
        j_sp,
        j_s,
        j_c,
        j: w.w_sp * j_sp + w.w_s * j_s + w.w_c * j_c,
    })
}

/// Weighted per-loop indices; actuator terms use the saturated commands.
pub fn loop_costs(log: &ResultsLog, weights: &CostWeights) -> Result<LoopCostReport> {
    let lim = &log.limits;
    let ph = loop_cost(
        cost_tracking(&log.series(|r| r.ph), &log.series(|r| r.ph_ref))?,
        &log.series(|r| r.q_co2_cmd),
        lim.q_co2_max,
        &weights.ph,
    )?;
    let do_y = log.series(|r| r.do_pct);
    let do_ref = log.series(|r| r.do_ref);
    let do_sp = if weights.do_symmetric {
        cost_tracking(&do_y, &do_ref)?
    } else {
        cost_tracking_upper(&do_y, &do_ref)?
    };
    let do_ = loop_cost(do_sp, &log.series(|r| r.q_air_cmd), lim.q_air_max, &weights.do_)?;

    let w = &weights.temp;
    let q_w = log.series(|r| r.q_w);
    let j_sp = cost_tracking(&log.series(|r| r.temp), &log.series(|r| r.temp_ref))?;
    let j_s1 = cost_smoothness(&q_w, 0.0, lim.q_w_max)?;
    let j_s2 = if lim.t_in_max > lim.t_in_min {
        cost_smoothness(&log.series(|r| r.t_in_hx), lim.t_in_min, lim.t_in_max)?
    } else {
        0.0
    };
    let j_c = cost_consumption(&q_w, lim.q_w_max)?;
    let temp = TempLoopCost {
        j_sp,
        j_s1,
        j_s2,
        j_c,
        j: w.w_sp * j_sp + w.w_s1 * j_s1 + w.w_s2 * j_s2 + w.w_c * j_c,
    };
    Ok(LoopCostReport {
        ph,
        do_,
        temp,
        j_ph: ph.j,
        j_do: do_.j,
        j_temp: temp.j,
        j_avg: (ph.j + do_.j + temp.j) / 3.0,
    })
}

/// Divides each loop index by the baseline's.
pub fn normalize(report: &LoopCostReport, baseline: &LoopCostReport) -> Result<NormalizedCosts> {
    let div = |a: f64, b: f64, name: &str| {
        if b > 0.0 {
            Ok(a / b)
        } else {
            Err(Error::Evaluation(format!("baseline {name} must be positive, got {b}")))
        }
    };
    let j_ph = div(report.j_ph, baseline.j_ph, "j_ph")?;
    let j_do = div(report.j_do, baseline.j_do, "j_do")?;
    let j_temp = div(report.j_temp, baseline.j_temp, "j_temp")?;
    Ok(NormalizedCosts {
        j_ph,
        j_do,
        j_temp,
        j_avg: (j_ph + j_do + j_temp) / 3.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub total_air_l: f64,
    pub total_co2_l: f64,
    pub harvested_g: f64,
    /// Reactor biomass inventory at the start and end [g].
    pub x0_g: f64,
    pub xf_g: f64,
    pub biomass_produced_g: f64,
    /// [g·m⁻²·day⁻¹]
    pub prod_areal: f64,
    pub yield_pct: f64,
    /// [g·m⁻²·day⁻¹]
    pub harv_areal: f64,
    pub accum_rel_pct: f64,
}

/// Production and consumption totals of a run.
pub fn compute_kpis(log: &ResultsLog, geom: &ReactorGeometry) -> Result<KpiReport> {
    let t_m = log.t_m;
    let total_air_l: f64 = log.records.iter().map(|r| r.q_air * t_m * 1000.0).sum();
    let total_co2_l: f64 = log.records.iter().map(|r| r.q_co2 * t_m * 1000.0).sum();
    let harvested_g: f64 = log.records.iter().map(|r| r.x_alg * r.q_h * t_m).sum();
    let x0_g = log.initial_state.x_alg * log.initial_state.vol;
    let xf_g = log.final_state.x_alg * log.final_state.vol;
    let biomass_produced_g = (xf_g - x0_g) + harvested_g;
    let days = log.horizon() / SECONDS_PER_DAY;
    let area = geom.area();
    let (prod_areal, harv_areal) = if days > 0.0 {
        (biomass_produced_g / (area * days), harvested_g / (area * days))
    } else {
        (0.0, 0.0)
    };
    let yield_pct = if biomass_produced_g.abs() > f64::EPSILON * x0_g.abs() {
        100.0 * harvested_g / biomass_produced_g
    } else {
        0.0
    };
    if !(x0_g > 0.0) {
        return Err(Error::Evaluation(format!(
            "initial biomass inventory must be positive, got {x0_g}"
        )));
    }
    Ok(KpiReport {
        total_air_l,
        total_co2_l,
        harvested_g,
        x0_g,
        xf_g,
        biomass_produced_g,
        prod_areal,
        yield_pct,
        harv_areal,
        accum_rel_pct: 100.0 * (xf_g - x0_g) / x0_g,
    })
}

/// Costs and KPIs of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub modes: [String; 4],
    pub costs: LoopCostReport,
    pub kpis: KpiReport,
}

pub fn summarize(label: &str, log: &ResultsLog, geom: &ReactorGeometry, weights: &CostWeights) -> Result<RunSummary> {
    Ok(RunSummary {
        label: label.to_string(),
        modes: log.controllers.clone(),
        costs: loop_costs(log, weights)?,
        kpis: compute_kpis(log, geom)?,
    })
}

/// Side-by-side table of several runs, indices normalised to the first.
pub fn comparison_table(runs: &[RunSummary]) -> Result<String> {
    let Some(base) = runs.first() else {
        return Ok(String::new());
    };
    let norm: Vec<NormalizedCosts> = runs
        .iter()
        .map(|r| normalize(&r.costs, &base.costs))
        .collect::<Result<_>>()?;
    let mut out = String::new();
    let row = |out: &mut String, name: &str, cells: Vec<String>| {
        let _ = write!(out, "{name:<34}");
        for c in cells {
            let _ = write!(out, "{c:>16}");
        }
        out.push('\n');
    };
    row(&mut out, "", runs.iter().map(|r| r.label.clone()).collect());
    for (i, name) in ["pH control", "DO control", "Harvest/dilution", "Temperature control"]
        .iter()
        .enumerate()
    {
        row(&mut out, name, runs.iter().map(|r| r.modes[i].clone()).collect());
    }
    let num = |v: f64, p: usize| format!("{v:.p$}");
    row(&mut out, "J_pH", norm.iter().map(|n| num(n.j_ph, 4)).collect());
    row(&mut out, "J_DO", norm.iter().map(|n| num(n.j_do, 4)).collect());
    row(&mut out, "J_Temp", norm.iter().map(|n| num(n.j_temp, 4)).collect());
    row(&mut out, "J_avg", norm.iter().map(|n| num(n.j_avg, 4)).collect());
    let k = |f: fn(&KpiReport) -> f64, p: usize| runs.iter().map(|r| num(f(&r.kpis), p)).collect::<Vec<_>>();
    row(&mut out, "Total air injected [L]", k(|k| k.total_air_l, 2));
    row(&mut out, "Total CO2 injected [L]", k(|k| k.total_co2_l, 2));
    row(&mut out, "Total biomass produced [g]", k(|k| k.biomass_produced_g, 2));
    row(&mut out, "Productivity [g m-2 day-1]", k(|k| k.prod_areal, 2));
    row(&mut out, "Harvested amount [g]", k(|k| k.harvested_g, 2));
    row(&mut out, "Harvested per area [g m-2 day-1]", k(|k| k.harv_areal, 2));
    row(&mut out, "Production yield ratio [%]", k(|k| k.yield_pct, 2));
    row(&mut out, "Relative accumulation [%]", k(|k| k.accum_rel_pct, 2));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracking_examples() {
        assert_eq!(cost_tracking(&[8.0, 8.0], &[8.0, 8.0]).unwrap(), 0.0);
        assert!((cost_tracking(&[7.6], &[8.0]).unwrap() - 0.05).abs() < 1e-15);
        let y = vec![101.0; 10];
        let r = vec![100.0; 10];
        assert!((cost_tracking(&y, &r).unwrap() - 0.1).abs() < 1e-14);
        assert!(cost_tracking(&[1.0], &[0.0]).is_err());
        assert!(cost_tracking(&[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn upper_tracking_ignores_deficit() {
        assert_eq!(cost_tracking_upper(&[140.0, 165.0], &[150.0, 150.0]).unwrap(), 0.1);
    }

    #[test]
    fn smoothness_examples() {
        assert_eq!(cost_smoothness(&[3.0; 5], 0.0, 4.0).unwrap(), 0.0);
        assert_eq!(cost_smoothness(&[0.0, 4.0], 0.0, 4.0).unwrap(), 1.0);
        assert_eq!(cost_smoothness(&[0.0, 2.0, 4.0], 0.0, 4.0).unwrap(), 0.5);
        assert!(cost_smoothness(&[0.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn consumption_examples() {
        assert_eq!(cost_consumption(&[0.0; 4], 2.0).unwrap(), 0.0);
        assert_eq!(cost_consumption(&[2.0; 4], 2.0).unwrap(), 4.0);
        assert_eq!(cost_consumption(&[1.0; 4], 2.0).unwrap(), 2.0);
    }

    fn report(j: [f64; 3]) -> LoopCostReport {
        let lc = |j| LoopCost {
            j_sp: j,
            j_s: 0.0,
            j_c: 0.0,
            j,
        };
        LoopCostReport {
            ph: lc(j[0]),
            do_: lc(j[1]),
            temp: TempLoopCost {
                j_sp: j[2],
                j_s1: 0.0,
                j_s2: 0.0,
                j_c: 0.0,
                j: j[2],
            },
            j_ph: j[0],
            j_do: j[1],
            j_temp: j[2],
            j_avg: (j[0] + j[1] + j[2]) / 3.0,
        }
    }

    #[test]
    fn normalize_examples() {
        let base = report([2.0, 3.0, 5.0]);
        let n = normalize(&base, &base).unwrap();
        assert_eq!((n.j_ph, n.j_do, n.j_temp, n.j_avg), (1.0, 1.0, 1.0, 1.0));
        let n = normalize(&report([1.0, 3.0, 5.0]), &base).unwrap();
        assert_eq!(n.j_ph, 0.5);
        assert!(normalize(&base, &report([0.0, 1.0, 1.0])).is_err());
    }
}
