//! Drive sweeps, minimum search, and cooling-limit estimates.

use serde::Serialize;

use crate::atom::{build_atom_liouvillian_3l, build_atom_liouvillian_4l, planck_occupation, FourLevelParams, ThreeLevelParams};
use crate::composite::AtomModel;
use crate::error::{invalid, Result};
use crate::rates::{cooling_limit, effective_temperature, rates_3l, rates_4l, working_region_bound, Dephasing3, Dephasing4};
use crate::regression::{reduced_rates_3l, reduced_rates_4l, sigma_minus_3l, sigma_minus_4l};
use crate::resonator::ResonatorParams;
use crate::units;

/// Default sweep grid: 200 log-spaced drives over `[1e-3, 1e4]` MHz.
pub const DEFAULT_GRID: (f64, f64, usize) = (1e-3, 1e4, 200);

/// How the heating and cooling rates of a sweep row are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSource {
    /// Closed-form expressions.
    ClosedForm,
    /// Reduced regression systems integrated numerically.
    RegressionOracle,
    /// Correlation integrals of the full atom Liouvillian.
    FullLiouvillian,
}

impl RateSource {
    pub fn name(self) -> &'static str {
        match self {
            RateSource::ClosedForm => "closed",
            RateSource::RegressionOracle => "oracle",
            RateSource::FullLiouvillian => "full",
        }
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(invalid("drive_grid", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    if n < 2 {
        return Err(invalid("drive_grid", format!("need at least 2 points, got {n}")));
    }
    let (a, b) = (lo.log10(), hi.log10());
    let step = (b - a) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|k| 10f64.powf(a + step * k as f64)).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

pub fn default_grid() -> Vec<f64> {
    let (lo, hi, n) = DEFAULT_GRID;
    log_grid(lo, hi, n).expect("default grid is valid")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub model: AtomModel,
    pub kappa: f64,
    pub nbar_r: f64,
    /// Collective coupling `g_N`.
    pub g_n: f64,
    pub drive_grid: Vec<f64>,
    pub rate_source: RateSource,
}

/// One grid point. Failed points keep `NaN` results and carry the error text.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub drive: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub n_ss: f64,
    pub populations: Vec<f64>,
    pub effective_temperature_kelvin: f64,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.drive_grid.len() < 2 {
            return Err(invalid("drive_grid", "need at least 2 points"));
        }
        if self.drive_grid.windows(2).any(|w| !(w[1] > w[0])) || !(self.drive_grid[0] >= 0.0) {
            return Err(invalid("drive_grid", "drives must be non-negative and strictly increasing"));
        }
        for (name, v) in [("kappa", self.kappa), ("nbar_r", self.nbar_r)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.g_n > 0.0) || !self.g_n.is_finite() {
            return Err(invalid("g_n", format!("must be positive and finite, got {}", self.g_n)));
        }
        match self.model {
            AtomModel::Three(p) => p.validate(),
            AtomModel::Four(p) => p.validate(),
        }
    }

    pub fn omega_r(&self) -> f64 {
        match self.model {
            AtomModel::Three(p) => p.omega_r,
            AtomModel::Four(p) => p.omega_r,
        }
    }

    pub fn with_drive(&self, drive: f64) -> AtomModel {
        match self.model {
            AtomModel::Three(p) => AtomModel::Three(p.with_drive(drive)),
            AtomModel::Four(p) => AtomModel::Four(p.with_drive(drive)),
        }
    }

    /// `(A₊, A₋, populations)` at `drive` from the configured source.
    pub fn rates_at(&self, drive: f64) -> Result<(f64, f64, Vec<f64>)> {
        let g = self.g_n;
        match (self.with_drive(drive), self.rate_source) {
            (AtomModel::Three(p), RateSource::ClosedForm) => {
                let r = rates_3l(&p, g)?;
                Ok((r.a_plus, r.a_minus, r.pops))
            }
            (AtomModel::Four(p), RateSource::ClosedForm) => {
                let r = rates_4l(&p, g)?;
                Ok((r.a_plus, r.a_minus, r.pops))
            }
            (AtomModel::Three(p), RateSource::RegressionOracle) => {
                let (ap, am) = reduced_rates_3l(&p, g)?;
                Ok((ap, am, crate::rates::steady_populations_3l(&p)?.pops))
            }
            (AtomModel::Four(p), RateSource::RegressionOracle) => {
                let (ap, am) = reduced_rates_4l(&p, g)?;
                Ok((ap, am, crate::rates::steady_populations_4l(&p)?.pops))
            }
            (AtomModel::Three(p), RateSource::FullLiouvillian) => full_rates(&build_atom_liouvillian_3l(&p)?, &sigma_minus_3l(), g),
            (AtomModel::Four(p), RateSource::FullLiouvillian) => full_rates(&build_atom_liouvillian_4l(&p)?, &sigma_minus_4l(), g),
        }
    }

    /// Steady photon number at `drive`.
    pub fn n_ss_at(&self, drive: f64) -> Result<f64> {
        let (a_plus, a_minus, _) = self.rates_at(drive)?;
        ResonatorParams { kappa: self.kappa, nbar_r: self.nbar_r, a_plus, a_minus }.steady_photon_number()
    }

    fn row(&self, drive: f64) -> Result<SweepRow> {
        let (a_plus, a_minus, populations) = self.rates_at(drive)?;
        let n_ss = ResonatorParams { kappa: self.kappa, nbar_r: self.nbar_r, a_plus, a_minus }.steady_photon_number()?;
        let t_eff = if n_ss > 0.0 { effective_temperature(self.omega_r(), n_ss)? } else { 0.0 };
        Ok(SweepRow { drive, a_plus, a_minus, n_ss, populations, effective_temperature_kelvin: t_eff, error: None })
    }
}

fn full_rates(l: &crate::operator::Superoperator, sm: &crate::operator::Operator, g: f64) -> Result<(f64, f64, Vec<f64>)> {
    let rho = crate::operator::steady_state(l)?;
    let (ap, am) = crate::regression::numeric_rates_with_state(l, &rho, sm, g)?;
    Ok((ap, am, rho.real_diagonal()))
}

/// Evaluate every grid point; failures are recorded in the row and the sweep continues.
pub fn sweep_drive(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec
        .drive_grid
        .iter()
        .map(|&drive| {
            spec.row(drive).unwrap_or_else(|e| SweepRow {
                drive,
                a_plus: f64::NAN,
                a_minus: f64::NAN,
                n_ss: f64::NAN,
                populations: Vec::new(),
                effective_temperature_kelvin: f64::NAN,
                error: Some(e.to_string()),
            })
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Minimum {
    pub drive: f64,
    pub n_ss: f64,
    /// Index of the best grid row.
    pub index: usize,
    /// The best grid row is the first successful row, or every later row stays
    /// within [`FLAT_TOLERANCE`] of it (a curve still falling or flat at the grid end).
    pub at_boundary: bool,
}

/// Relative spread under which trailing rows count as the same value.
pub const FLAT_TOLERANCE: f64 = 1e-12;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Smallest `n_ss` over successful rows, refined by golden-section search in
/// `log(drive)` between the neighbouring grid points when `objective` is given.
/// Ties go to the smaller drive.
pub fn find_minimum(rows: &[SweepRow], objective: Option<&dyn Fn(f64) -> Result<f64>>) -> Result<Minimum> {
    let ok: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].is_ok() && rows[i].n_ss.is_finite()).collect();
    if ok.len() < 3 {
        return Err(invalid("rows", format!("need at least 3 successful rows, got {}", ok.len())));
    }
    let mut best = 0;
    for k in 1..ok.len() {
        if rows[ok[k]].n_ss < rows[ok[best]].n_ss {
            best = k;
        }
    }
    let index = ok[best];
    let floor = rows[index].n_ss;
    let flat_tail = ok[best..].iter().all(|&i| rows[i].n_ss <= floor * (1.0 + FLAT_TOLERANCE));
    let at_boundary = best == 0 || flat_tail;
    let mut out = Minimum { drive: rows[index].drive, n_ss: rows[index].n_ss, index, at_boundary };
    let Some(f) = objective else { return Ok(out) };
    if at_boundary || !(rows[ok[best - 1]].drive > 0.0) {
        return Ok(out);
    }
    let (mut lo, mut hi) = (rows[ok[best - 1]].drive.ln(), rows[ok[best + 1]].drive.ln());
    let eval = |x: f64| f(x.exp());
    let mut c = hi - GOLDEN * (hi - lo);
    let mut d = lo + GOLDEN * (hi - lo);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-12 * (1.0 + lo.abs()) {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = eval(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + GOLDEN * (hi - lo);
            fd = eval(d)?;
        }
    }
    let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    if fx < out.n_ss {
        out.drive = x.exp();
        out.n_ss = fx;
    }
    Ok(out)
}

/// First drive past the minimum at which `n_ss` reaches `factor` times the minimum.
pub fn upturn_drive(rows: &[SweepRow], min: &Minimum, factor: f64) -> Option<f64> {
    rows[min.index..].iter().find(|r| r.is_ok() && r.n_ss >= factor * min.n_ss).map(|r| r.drive)
}

/// Doppler FWHM `(ν₀/c)√(8 ln2 k_B T / m)` in the unit of `nu0`.
pub fn doppler_broadening(nu0: f64, temperature_kelvin: f64, mass_amu: f64) -> Result<f64> {
    if !(nu0 >= 0.0) || !(temperature_kelvin >= 0.0) || !(mass_amu > 0.0) {
        return Err(invalid("doppler", format!("need nu0 >= 0, T >= 0, m > 0; got {nu0}, {temperature_kelvin}, {mass_amu}")));
    }
    let m = mass_amu * units::ATOMIC_MASS_UNIT;
    Ok(nu0 / units::SPEED_OF_LIGHT * (8.0 * std::f64::consts::LN_2 * units::BOLTZMANN * temperature_kelvin / m).sqrt())
}

/// Device-level inputs of a cooling-limit estimate (rates in MHz).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateInput {
    pub omega_r: f64,
    pub g_n: f64,
    pub kappa: f64,
    /// Microwave dephasing rate `Υ_ab`.
    pub ups_ab: f64,
    pub nbar_r: f64,
    /// Optical dephasing `Υ_eb`; enables the working-region bound.
    pub ups_eb: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub input: EstimateInput,
    pub limit_exact: f64,
    pub limit_approx: f64,
    pub effective_temperature_exact_kelvin: f64,
    pub effective_temperature_approx_kelvin: f64,
    pub working_region_bound: Option<f64>,
    /// `κ = 0`: nothing heats the resonator and the limit is zero.
    pub ideal_cavity: bool,
}

pub fn estimate_report(input: &EstimateInput) -> Result<EstimateReport> {
    let lim = cooling_limit(input.g_n, input.kappa, input.ups_ab, input.nbar_r)?;
    let t_eff = |n: f64| if n > 0.0 { effective_temperature(input.omega_r, n) } else { Ok(0.0) };
    let bound = match input.ups_eb {
        Some(eb) => Some(working_region_bound(eb, input.ups_ab)?),
        None => None,
    };
    Ok(EstimateReport {
        input: *input,
        limit_exact: lim.exact,
        limit_approx: lim.approx,
        effective_temperature_exact_kelvin: t_eff(lim.exact)?,
        effective_temperature_approx_kelvin: t_eff(lim.approx)?,
        working_region_bound: bound,
        ideal_cavity: input.kappa == 0.0,
    })
}

/// Named parameter sets shipped with the tools.
pub mod presets {
    use super::*;

    /// Thermal photon number used for the 1 GHz room-temperature resonator
    /// (the Planck value is about 6250).
    pub const ROOM_NBAR: f64 = 6200.0;
    pub const ROOM_KELVIN: f64 = 300.0;
    pub const RESONATOR_MHZ: f64 = 1000.0;
    pub const OPTICAL_GAMMA_MHZ: f64 = 1000.0;
    pub const G_N_MHZ: f64 = 1.5;
    pub const KAPPA_MHZ: f64 = 0.1;
    pub const UPS_AB_MHZ: f64 = 0.5;

    /// Wide grid reaching the weak-drive plateau, `[1e-16, 1e4]` MHz.
    pub fn wide_grid() -> Vec<f64> {
        log_grid(1e-16, 1e4, 241).expect("valid grid")
    }

    pub fn three_level_optical() -> Result<ThreeLevelParams> {
        let omega_ea = 4.0e8;
        ThreeLevelParams {
            omega_r: RESONATOR_MHZ,
            omega_ea,
            omega_eb: omega_ea + RESONATOR_MHZ,
            gamma_ea: OPTICAL_GAMMA_MHZ,
            gamma_eb: OPTICAL_GAMMA_MHZ,
            gp_a: 0.0,
            gp_b: 0.0,
            gp_e: 0.0,
            temperature: units::kelvin_to_mhz(ROOM_KELVIN),
            drive: 0.0,
        }
        .with_target_ups_ab(UPS_AB_MHZ)
    }

    pub fn four_level_optical() -> Result<FourLevelParams> {
        let (omega_em, omega_ma) = (3.0e8, 4.0e8);
        FourLevelParams {
            omega_r: RESONATOR_MHZ,
            omega_em,
            omega_ma,
            omega_eb: omega_em + omega_ma + RESONATOR_MHZ,
            gamma_em: OPTICAL_GAMMA_MHZ,
            gamma_ma: OPTICAL_GAMMA_MHZ,
            gamma_eb: OPTICAL_GAMMA_MHZ,
            gp_a: 0.0,
            gp_b: 0.0,
            gp_m: 0.0,
            gp_e: 0.0,
            temperature: units::kelvin_to_mhz(ROOM_KELVIN),
            drive: 0.0,
        }
        .with_target_ups_ab(UPS_AB_MHZ)
    }

    pub fn fig2a() -> Result<SweepSpec> {
        Ok(SweepSpec {
            model: AtomModel::Three(three_level_optical()?),
            kappa: KAPPA_MHZ,
            nbar_r: ROOM_NBAR,
            g_n: G_N_MHZ,
            drive_grid: wide_grid(),
            rate_source: RateSource::ClosedForm,
        })
    }

    pub fn fig2b() -> Result<SweepSpec> {
        Ok(SweepSpec { model: AtomModel::Four(four_level_optical()?), ..fig2a()? })
    }

    pub fn sec5_nv() -> EstimateInput {
        EstimateInput { omega_r: RESONATOR_MHZ, g_n: G_N_MHZ, kappa: KAPPA_MHZ, ups_ab: UPS_AB_MHZ, nbar_r: ROOM_NBAR, ups_eb: None }
    }

    /// Sodium vapour: hyperfine splitting 1.77 GHz, mass 23 u, dephasing set by
    /// half the room-temperature Doppler width.
    pub fn sec5_na() -> Result<EstimateInput> {
        let width = doppler_broadening(1770.0, ROOM_KELVIN, 23.0)?;
        Ok(EstimateInput { ups_ab: 0.5 * width, ..sec5_nv() })
    }

    /// Planck occupation of the resonator at room temperature.
    pub fn room_planck_nbar() -> Result<f64> {
        planck_occupation(RESONATOR_MHZ, units::kelvin_to_mhz(ROOM_KELVIN))
    }

    /// Dephasing rates of the preset atoms, for reporting.
    pub fn dephasing_3l() -> Result<Dephasing3> {
        Dephasing3::new(&three_level_optical()?)
    }

    pub fn dephasing_4l() -> Result<Dephasing4> {
        Dephasing4::new(&four_level_optical()?)
    }
}
