//! Carbonate speciation and proton dynamics implied by electroneutrality.

use crate::error::{Error, Result};

/// Carbonate species and hydroxide [mol·m⁻³].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarbonateSpeciation {
    pub co2: f64,
    pub hco3: f64,
    pub co3: f64,
    pub oh: f64,
    /// Speciation denominator `H² + H·K1 + K1·K2` [mol²·m⁻⁶].
    pub delta: f64,
}

pub fn speciate_carbonates(dic: f64, h: f64, k1: f64, k2: f64, kw: f64) -> Result<CarbonateSpeciation> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("proton concentration must be positive, got {h}")));
    }
    if !(dic >= 0.0) || !dic.is_finite() {
        return Err(Error::Domain(format!("DIC must be non-negative, got {dic}")));
    }
    let delta = h * h + h * k1 + k1 * k2;
    Ok(CarbonateSpeciation {
        co2: dic * h * h / delta,
        hco3: dic * h * k1 / delta,
        co3: dic * k1 * k2 / delta,
        oh: kw / h,
        delta,
    })
}

/// Charge balance `Cat + H − HCO3⁻ − 2·CO3²⁻ − OH⁻`.
pub fn electroneutrality_residual(dic: f64, cat: f64, h: f64, k1: f64, k2: f64, kw: f64) -> f64 {
    let delta = h * h + h * k1 + k1 * k2;
    cat + h - dic * (h * k1 + 2.0 * k1 * k2) / delta - kw / h
}

/// Time derivative of the proton concentration that keeps the charge balance satisfied
/// while DIC and cations change at the given rates.
#[allow(clippy::too_many_arguments)]
pub fn proton_derivative(
    dic: f64,
    _cat: f64,
    h: f64,
    dic_dot: f64,
    cat_dot: f64,
    k1: f64,
    k2: f64,
    kw: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("proton concentration must be positive, got {h}")));
    }
    let delta = h * h + h * k1 + k1 * k2;
    let g = h * k1 / delta;
    let hh = k1 * k2 / delta;
    let ddelta_dh = 2.0 * h + k1;
    let dg_dh = k1 * (k1 * k2 - h * h) / (delta * delta);
    let dhh_dh = -k1 * k2 / (delta * delta) * ddelta_dh;

    let f_dic = -(g + 2.0 * hh);
    let f_cat = 1.0;
    let f_h = 1.0 - dic * dg_dh - 2.0 * dic * dhh_dh + kw / (h * h);
    if f_h == 0.0 || !f_h.is_finite() {
        return Err(Error::Model(format!("singular charge-balance sensitivity at h = {h}")));
    }
    Ok(-(f_dic * dic_dot + f_cat * cat_dot) / f_h)
}

/// Proton concentration satisfying the charge balance for given DIC and cations.
///
/// Bisection on `log10(H)` over pH 0–14; the residual is strictly increasing in `H`.
pub fn equilibrium_proton(dic: f64, cat: f64, k1: f64, k2: f64, kw: f64) -> Result<f64> {
    let f = |log_h: f64| electroneutrality_residual(dic, cat, 10f64.powf(log_h), k1, k2, kw);
    // pH 14 .. pH 0 expressed in mol·m⁻³
    let (mut lo, mut hi) = (-11.0, 3.0);
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::Domain(format!(
            "no charge-balance root for dic = {dic}, cat = {cat} in pH range 0-14"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(10f64.powf(0.5 * (lo + hi)))
}

/// DIC consistent with a given pH and cation load, i.e. the inverse of [`equilibrium_proton`].
pub fn dic_for_proton(cat: f64, h: f64, k1: f64, k2: f64, kw: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("proton concentration must be positive, got {h}")));
    }
    let delta = h * h + h * k1 + k1 * k2;
    let charge_per_dic = (h * k1 + 2.0 * k1 * k2) / delta;
    let dic = (cat + h - kw / h) / charge_per_dic;
    if dic < 0.0 {
        return Err(Error::Domain(format!(
            "no non-negative DIC balances cat = {cat} at h = {h}"
        )));
    }
    Ok(dic)
}
