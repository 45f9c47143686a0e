//! Browser bindings: drive-sweep curves, cooling limits, and photon-number
//! relaxation, on top of the optical presets.
//!
//! Every export returns a flat `Float64Array`; errors surface as JS exceptions.

use qfridge::composite::AtomModel;
use qfridge::harness::{estimate_report, log_grid, presets, EstimateInput, RateSource, SweepSpec};
use qfridge::resonator::ResonatorParams;
use wasm_bindgen::prelude::*;

fn js(e: qfridge::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Optical preset for `model` ("three_level" or "four_level") with the
/// resonator and coupling replaced.
pub fn spec(model: &str, g_n: f64, kappa: f64, ups_ab: f64, nbar: f64) -> qfridge::Result<SweepSpec> {
    let model = match model {
        "four_level" => AtomModel::Four(presets::four_level_optical()?.with_target_ups_ab(ups_ab)?),
        _ => AtomModel::Three(presets::three_level_optical()?.with_target_ups_ab(ups_ab)?),
    };
    Ok(SweepSpec { model, kappa, nbar_r: nbar, g_n, drive_grid: vec![], rate_source: RateSource::ClosedForm })
}

/// `[drive₀, n₀, drive₁, n₁, …]` over a log grid in MHz; failed points are `NaN`.
#[allow(clippy::too_many_arguments)]
pub fn sweep_points(
    model: &str,
    drive_min: f64,
    drive_max: f64,
    points: usize,
    g_n: f64,
    kappa: f64,
    ups_ab: f64,
    nbar: f64,
) -> qfridge::Result<Vec<f64>> {
    let spec = spec(model, g_n, kappa, ups_ab, nbar)?;
    let grid = log_grid(drive_min, drive_max, points)?;
    Ok(grid.into_iter().flat_map(|d| [d, spec.n_ss_at(d).unwrap_or(f64::NAN)]).collect())
}

/// `[exact, approx, T_exact (K), T_approx (K)]`.
pub fn limit_values(omega_r: f64, g_n: f64, kappa: f64, ups_ab: f64, nbar: f64) -> qfridge::Result<Vec<f64>> {
    let r = estimate_report(&EstimateInput { omega_r, g_n, kappa, ups_ab, nbar_r: nbar, ups_eb: None })?;
    Ok(vec![r.limit_exact, r.limit_approx, r.effective_temperature_exact_kelvin, r.effective_temperature_approx_kelvin])
}

/// `[t₀, n₀, t₁, n₁, …]` with `t` in µs, relaxing from `n0` at fixed drive.
#[allow(clippy::too_many_arguments)]
pub fn transient_points(
    model: &str,
    drive: f64,
    n0: f64,
    t_final: f64,
    points: usize,
    g_n: f64,
    kappa: f64,
    ups_ab: f64,
    nbar: f64,
) -> qfridge::Result<Vec<f64>> {
    let spec = spec(model, g_n, kappa, ups_ab, nbar)?;
    let (a_plus, a_minus, _) = spec.rates_at(drive)?;
    let rp = ResonatorParams { kappa, nbar_r: nbar, a_plus, a_minus };
    let points = points.max(2);
    let mut out = Vec::with_capacity(2 * points);
    for k in 0..points {
        let t = t_final * k as f64 / (points - 1) as f64;
        out.push(t);
        out.push(rp.transient_mean_photon(n0, t)?);
    }
    Ok(out)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sweep_curve(
    model: &str,
    drive_min: f64,
    drive_max: f64,
    points: usize,
    g_n: f64,
    kappa: f64,
    ups_ab: f64,
    nbar: f64,
) -> Result<Vec<f64>, JsError> {
    sweep_points(model, drive_min, drive_max, points, g_n, kappa, ups_ab, nbar).map_err(js)
}

#[wasm_bindgen]
pub fn cooling_limit(omega_r: f64, g_n: f64, kappa: f64, ups_ab: f64, nbar: f64) -> Result<Vec<f64>, JsError> {
    limit_values(omega_r, g_n, kappa, ups_ab, nbar).map_err(js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn transient(
    model: &str,
    drive: f64,
    n0: f64,
    t_final: f64,
    points: usize,
    g_n: f64,
    kappa: f64,
    ups_ab: f64,
    nbar: f64,
) -> Result<Vec<f64>, JsError> {
    transient_points(model, drive, n0, t_final, points, g_n, kappa, ups_ab, nbar).map_err(js)
}
