//! Run configuration: TOML with unit-tagged values, validated eagerly.
//!
//! ```toml
//! model = "three_level"
//!
//! [atom]
//! omega_r = "1 GHz"
//! omega_ea = "400 THz"
//! gamma_ea = "1 GHz"
//! gamma_eb = "1 GHz"
//! ups_ab = "0.5 MHz"
//! temperature = "300 K"
//!
//! [resonator]
//! kappa = "0.1 MHz"
//! g_n = "1.5 MHz"
//! ```

use std::fmt::Write as _;
use std::ops::Range;

use qfridge::atom::{planck_occupation, FourLevelParams, ThreeLevelParams};
use qfridge::composite::AtomModel;
use qfridge::harness::{doppler_broadening, log_grid, EstimateInput, RateSource, SweepSpec, DEFAULT_GRID};
use qfridge::units;
use serde::Deserialize;
use toml::Spanned;

use crate::quantity::{format_quantity, parse_quantity, Dimension};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error("line {line}: `{field}`: {message}")]
    Field { line: usize, field: String, message: String },
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    ThreeLevel,
    FourLevel,
}

impl ModelKind {
    fn name(self) -> &'static str {
        match self {
            ModelKind::ThreeLevel => "three_level",
            ModelKind::FourLevel => "four_level",
        }
    }
}

/// Pure dephasing of the microwave pair: explicit rates, or a target `Υ_ab`
/// split evenly between `a` and `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dephasing {
    Rates { gp_a: f64, gp_b: f64 },
    TargetUpsAb(f64),
}

/// Atom parameters in MHz, temperature in K. `omega_ea`/`omega_em` and
/// `gamma_ea`/`gamma_em` share a slot: the drive transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomConfig {
    pub model: ModelKind,
    pub omega_r: f64,
    pub omega_drive: f64,
    /// Relay gap `Ω_ma` (four-level only).
    pub omega_ma: f64,
    pub omega_eb: f64,
    pub gamma_drive: f64,
    pub gamma_ma: f64,
    pub gamma_eb: f64,
    pub gp_m: f64,
    pub gp_e: f64,
    pub dephasing: Dephasing,
    pub temperature_kelvin: f64,
}

impl AtomConfig {
    pub fn to_model(&self) -> qfridge::Result<AtomModel> {
        let t = units::kelvin_to_mhz(self.temperature_kelvin);
        let (gp_a, gp_b) = match self.dephasing {
            Dephasing::Rates { gp_a, gp_b } => (gp_a, gp_b),
            Dephasing::TargetUpsAb(_) => (0.0, 0.0),
        };
        match self.model {
            ModelKind::ThreeLevel => {
                let p = ThreeLevelParams {
                    omega_r: self.omega_r,
                    omega_ea: self.omega_drive,
                    omega_eb: self.omega_eb,
                    gamma_ea: self.gamma_drive,
                    gamma_eb: self.gamma_eb,
                    gp_a,
                    gp_b,
                    gp_e: self.gp_e,
                    temperature: t,
                    drive: 0.0,
                };
                p.validate()?;
                let p = match self.dephasing {
                    Dephasing::TargetUpsAb(u) => p.with_target_ups_ab(u)?,
                    Dephasing::Rates { .. } => p,
                };
                Ok(AtomModel::Three(p))
            }
            ModelKind::FourLevel => {
                let p = FourLevelParams {
                    omega_r: self.omega_r,
                    omega_em: self.omega_drive,
                    omega_ma: self.omega_ma,
                    omega_eb: self.omega_eb,
                    gamma_em: self.gamma_drive,
                    gamma_ma: self.gamma_ma,
                    gamma_eb: self.gamma_eb,
                    gp_a,
                    gp_b,
                    gp_m: self.gp_m,
                    gp_e: self.gp_e,
                    temperature: t,
                    drive: 0.0,
                };
                p.validate()?;
                let p = match self.dephasing {
                    Dephasing::TargetUpsAb(u) => p.with_target_ups_ab(u)?,
                    Dephasing::Rates { .. } => p,
                };
                Ok(AtomModel::Four(p))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemConfig {
    pub atom: AtomConfig,
    pub kappa: f64,
    pub g_n: f64,
    /// Thermal photon number; the Planck value at the atom temperature when absent.
    pub nbar: Option<f64>,
}

impl SystemConfig {
    pub fn nbar_r(&self) -> qfridge::Result<f64> {
        match self.nbar {
            Some(n) => Ok(n),
            None => planck_occupation(self.atom.omega_r, units::kelvin_to_mhz(self.atom.temperature_kelvin)),
        }
    }

    pub fn sweep_spec(&self, sweep: &SweepConfig) -> qfridge::Result<SweepSpec> {
        Ok(SweepSpec {
            model: self.atom.to_model()?,
            kappa: self.kappa,
            nbar_r: self.nbar_r()?,
            g_n: self.g_n,
            drive_grid: log_grid(sweep.drive_min, sweep.drive_max, sweep.points)?,
            rate_source: sweep.rate_source,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub drive_min: f64,
    pub drive_max: f64,
    pub points: usize,
    pub rate_source: RateSource,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let (drive_min, drive_max, points) = DEFAULT_GRID;
        Self { drive_min, drive_max, points, rate_source: RateSource::ClosedForm }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimateDephasing {
    UpsAb(f64),
    /// Half the Doppler FWHM of a line at `nu0` (MHz) for a gas at `temperature_kelvin`.
    Doppler {
        nu0: f64,
        temperature_kelvin: f64,
        mass_amu: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateConfig {
    pub omega_r: f64,
    pub g_n: f64,
    pub kappa: f64,
    pub nbar: f64,
    pub dephasing: EstimateDephasing,
    pub ups_eb: Option<f64>,
}

impl EstimateConfig {
    pub fn input(&self) -> qfridge::Result<EstimateInput> {
        let ups_ab = match self.dephasing {
            EstimateDephasing::UpsAb(u) => u,
            EstimateDephasing::Doppler { nu0, temperature_kelvin, mass_amu } => {
                0.5 * doppler_broadening(nu0, temperature_kelvin, mass_amu)?
            }
        };
        Ok(EstimateInput { omega_r: self.omega_r, g_n: self.g_n, kappa: self.kappa, ups_ab, nbar_r: self.nbar, ups_eb: self.ups_eb })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulateConfig {
    pub drive: Option<f64>,
    /// Initial photon number; the thermal value when absent.
    pub n0: Option<f64>,
    /// Final time in µs; five relaxation times when absent.
    pub t_final: Option<f64>,
    pub points: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { drive: None, n0: None, t_final: None, points: 201 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Tsv,
}

impl Format {
    pub fn delimiter(self) -> u8 {
        match self {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        }
    }

    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub system: Option<SystemConfig>,
    pub sweep: SweepConfig,
    pub estimate: Option<EstimateConfig>,
    pub simulate: SimulateConfig,
    pub output: OutputConfig,
}

type Q = Option<Spanned<String>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<Spanned<String>>,
    atom: Option<Spanned<RawAtom>>,
    resonator: Option<Spanned<RawResonator>>,
    sweep: Option<RawSweep>,
    estimate: Option<Spanned<RawEstimate>>,
    simulate: Option<RawSimulate>,
    output: Option<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    omega_r: Q,
    omega_ea: Q,
    omega_em: Q,
    omega_ma: Q,
    omega_eb: Q,
    gamma_ea: Q,
    gamma_em: Q,
    gamma_ma: Q,
    gamma_eb: Q,
    gp_a: Q,
    gp_b: Q,
    gp_m: Q,
    gp_e: Q,
    ups_ab: Q,
    temperature: Q,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResonator {
    kappa: Q,
    g_n: Q,
    nbar: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    drive_min: Q,
    drive_max: Q,
    points: Option<Spanned<i64>>,
    rate_source: Option<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEstimate {
    omega_r: Q,
    g_n: Q,
    kappa: Q,
    nbar: Option<Spanned<f64>>,
    ups_ab: Q,
    ups_eb: Q,
    doppler: Option<Spanned<RawDoppler>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoppler {
    nu0: Q,
    temperature: Q,
    mass_amu: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulate {
    drive: Q,
    n0: Option<Spanned<f64>>,
    t_final: Q,
    points: Option<Spanned<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<String>,
    format: Option<Spanned<String>>,
}

/// Field resolution with line tracking and a list of missing keys.
struct Ctx<'a> {
    text: &'a str,
    missing: Vec<String>,
}

impl<'a> Ctx<'a> {
    fn line(&self, span: Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())].matches('\n').count() + 1
    }

    fn err(&self, span: Range<usize>, field: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Field { line: self.line(span), field: field.to_string(), message: message.into() }
    }

    fn quantity(&self, q: &Q, field: &str, dim: Dimension) -> Result<Option<f64>, ConfigError> {
        match q {
            None => Ok(None),
            Some(s) => parse_quantity(s.get_ref(), dim).map(Some).map_err(|m| self.err(s.span(), field, m)),
        }
    }

    fn required(&mut self, q: &Q, field: &str, dim: Dimension) -> Result<f64, ConfigError> {
        let v = self.quantity(q, field, dim)?;
        if v.is_none() {
            self.missing.push(field.to_string());
        }
        Ok(v.unwrap_or(f64::NAN))
    }

    fn non_negative(&self, q: &Q, v: f64, field: &str) -> Result<f64, ConfigError> {
        if let Some(s) = q {
            if !(v >= 0.0) {
                return Err(self.err(s.span(), field, format!("must be >= 0, got {}", s.get_ref())));
            }
        }
        Ok(v)
    }

    fn count(&self, v: &Option<Spanned<i64>>, field: &str, default: usize, min: usize) -> Result<usize, ConfigError> {
        match v {
            None => Ok(default),
            Some(s) if *s.get_ref() >= min as i64 => Ok(*s.get_ref() as usize),
            Some(s) => Err(self.err(s.span(), field, format!("must be at least {min}, got {}", s.get_ref()))),
        }
    }

    fn forbid(&self, q: &Q, field: &str, model: ModelKind) -> Result<(), ConfigError> {
        match q {
            Some(s) => Err(self.err(s.span(), field, format!("not a parameter of the {} model", model.name()))),
            None => Ok(()),
        }
    }
}

/// Keys a minimal document needs, for the empty-document error.
const REQUIRED_SUMMARY: &[&str] = &[
    "model",
    "atom.omega_r",
    "atom.omega_ea (three_level) or atom.omega_em + atom.omega_ma (four_level)",
    "atom.gamma_*",
    "atom.ups_ab or atom.gp_a + atom.gp_b",
    "atom.temperature",
    "resonator.kappa",
    "resonator.g_n",
    "or instead: [estimate] with omega_r, g_n, kappa, nbar, ups_ab",
];

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut cx = Ctx { text, missing: Vec::new() };

    if raw.model.is_none() && raw.atom.is_none() && raw.resonator.is_none() && raw.estimate.is_none() {
        return Err(ConfigError::Missing(REQUIRED_SUMMARY.iter().map(|s| s.to_string()).collect()));
    }

    let system = if raw.model.is_some() || raw.atom.is_some() || raw.resonator.is_some() { parse_system(&mut cx, &raw)? } else { None };
    let estimate = match &raw.estimate {
        Some(e) => Some(parse_estimate(&mut cx, e)?),
        None => None,
    };

    let sweep = match &raw.sweep {
        None => SweepConfig::default(),
        Some(s) => {
            let d = SweepConfig::default();
            let drive_min = cx.quantity(&s.drive_min, "sweep.drive_min", Dimension::Frequency)?.unwrap_or(d.drive_min);
            let drive_max = cx.quantity(&s.drive_max, "sweep.drive_max", Dimension::Frequency)?.unwrap_or(d.drive_max);
            let points = cx.count(&s.points, "sweep.points", d.points, 2)?;
            let rate_source = match &s.rate_source {
                None => d.rate_source,
                Some(r) => match r.get_ref().as_str() {
                    "closed" | "closed_form" => RateSource::ClosedForm,
                    "oracle" | "regression_oracle" => RateSource::RegressionOracle,
                    "full" | "full_liouvillian" => RateSource::FullLiouvillian,
                    other => {
                        return Err(cx.err(
                            r.span(),
                            "sweep.rate_source",
                            format!("unknown source `{other}`; expected closed, oracle, or full"),
                        ))
                    }
                },
            };
            if let Err(e) = log_grid(drive_min, drive_max, points) {
                let span = s.drive_min.as_ref().or(s.drive_max.as_ref()).map(|q| q.span()).unwrap_or(0..0);
                return Err(cx.err(span, "sweep", e.to_string()));
            }
            SweepConfig { drive_min, drive_max, points, rate_source }
        }
    };

    let simulate = match &raw.simulate {
        None => SimulateConfig::default(),
        Some(s) => {
            let drive = cx.quantity(&s.drive, "simulate.drive", Dimension::Frequency)?;
            cx.non_negative(&s.drive, drive.unwrap_or(0.0), "simulate.drive")?;
            let t_final = cx.quantity(&s.t_final, "simulate.t_final", Dimension::Time)?;
            if let (Some(t), Some(q)) = (t_final, &s.t_final) {
                if !(t > 0.0) {
                    return Err(cx.err(q.span(), "simulate.t_final", "must be positive"));
                }
            }
            let n0 = match &s.n0 {
                Some(n) if !(*n.get_ref() >= 0.0) => return Err(cx.err(n.span(), "simulate.n0", "must be >= 0")),
                other => other.as_ref().map(|n| *n.get_ref()),
            };
            SimulateConfig { drive, n0, t_final, points: cx.count(&s.points, "simulate.points", 201, 2)? }
        }
    };

    let output = match &raw.output {
        None => OutputConfig::default(),
        Some(o) => OutputConfig {
            path: o.path.clone(),
            format: match &o.format {
                None => Format::Csv,
                Some(f) => match f.get_ref().as_str() {
                    "csv" => Format::Csv,
                    "tsv" => Format::Tsv,
                    other => return Err(cx.err(f.span(), "output.format", format!("unknown format `{other}`; expected csv or tsv"))),
                },
            },
        },
    };

    if !cx.missing.is_empty() {
        return Err(ConfigError::Missing(cx.missing));
    }
    Ok(RunConfig { system, sweep, estimate, simulate, output })
}

fn parse_system(cx: &mut Ctx, raw: &RawConfig) -> Result<Option<SystemConfig>, ConfigError> {
    let model = match &raw.model {
        None => {
            cx.missing.push("model".into());
            ModelKind::ThreeLevel
        }
        Some(m) => match m.get_ref().as_str() {
            "three_level" => ModelKind::ThreeLevel,
            "four_level" => ModelKind::FourLevel,
            other => return Err(cx.err(m.span(), "model", format!("unknown model `{other}`; expected three_level or four_level"))),
        },
    };
    let Some(atom) = &raw.atom else {
        cx.missing.push("atom".into());
        if raw.resonator.is_none() {
            cx.missing.push("resonator".into());
        }
        return Ok(None);
    };
    let a = atom.get_ref();
    let f = Dimension::Frequency;
    let omega_r = cx.required(&a.omega_r, "atom.omega_r", f)?;
    let (omega_drive, omega_ma, gamma_drive, gamma_ma, gp_m) = match model {
        ModelKind::ThreeLevel => {
            for (q, name) in [
                (&a.omega_em, "atom.omega_em"),
                (&a.omega_ma, "atom.omega_ma"),
                (&a.gamma_em, "atom.gamma_em"),
                (&a.gamma_ma, "atom.gamma_ma"),
                (&a.gp_m, "atom.gp_m"),
            ] {
                cx.forbid(q, name, model)?;
            }
            (cx.required(&a.omega_ea, "atom.omega_ea", f)?, 0.0, cx.required(&a.gamma_ea, "atom.gamma_ea", f)?, 0.0, 0.0)
        }
        ModelKind::FourLevel => {
            cx.forbid(&a.omega_ea, "atom.omega_ea", model)?;
            cx.forbid(&a.gamma_ea, "atom.gamma_ea", model)?;
            (
                cx.required(&a.omega_em, "atom.omega_em", f)?,
                cx.required(&a.omega_ma, "atom.omega_ma", f)?,
                cx.required(&a.gamma_em, "atom.gamma_em", f)?,
                cx.required(&a.gamma_ma, "atom.gamma_ma", f)?,
                cx.quantity(&a.gp_m, "atom.gp_m", f)?.unwrap_or(0.0),
            )
        }
    };
    let omega_eb = cx.quantity(&a.omega_eb, "atom.omega_eb", f)?.unwrap_or(omega_drive + omega_ma + omega_r);
    let gamma_eb = cx.required(&a.gamma_eb, "atom.gamma_eb", f)?;
    let gp_e = cx.quantity(&a.gp_e, "atom.gp_e", f)?.unwrap_or(0.0);
    let dephasing = match (&a.ups_ab, &a.gp_a, &a.gp_b) {
        (Some(_), None, None) => Dephasing::TargetUpsAb(cx.required(&a.ups_ab, "atom.ups_ab", f)?),
        (None, Some(_), Some(_)) => {
            Dephasing::Rates { gp_a: cx.required(&a.gp_a, "atom.gp_a", f)?, gp_b: cx.required(&a.gp_b, "atom.gp_b", f)? }
        }
        (Some(u), _, _) => return Err(cx.err(u.span(), "atom.ups_ab", "give either ups_ab or gp_a and gp_b, not both")),
        (None, Some(q), None) | (None, None, Some(q)) => return Err(cx.err(q.span(), "atom.gp_a", "gp_a and gp_b must be given together")),
        (None, None, None) => {
            cx.missing.push("atom.ups_ab (or atom.gp_a + atom.gp_b)".into());
            Dephasing::TargetUpsAb(f64::NAN)
        }
    };
    let temperature_kelvin = cx.required(&a.temperature, "atom.temperature", Dimension::Temperature)?;

    let (kappa, g_n, nbar) = match &raw.resonator {
        None => {
            cx.missing.push("resonator".into());
            (f64::NAN, f64::NAN, None)
        }
        Some(r) => {
            let r = r.get_ref();
            let kappa = cx.required(&r.kappa, "resonator.kappa", f)?;
            cx.non_negative(&r.kappa, kappa, "resonator.kappa")?;
            let g_n = cx.required(&r.g_n, "resonator.g_n", f)?;
            if let Some(q) = &r.g_n {
                if !(g_n > 0.0) {
                    return Err(cx.err(q.span(), "resonator.g_n", "must be positive"));
                }
            }
            let nbar = match &r.nbar {
                Some(n) if !(*n.get_ref() >= 0.0 && n.get_ref().is_finite()) => {
                    return Err(cx.err(n.span(), "resonator.nbar", "must be finite and >= 0"))
                }
                other => other.as_ref().map(|n| *n.get_ref()),
            };
            (kappa, g_n, nbar)
        }
    };
    if !cx.missing.is_empty() {
        return Ok(None);
    }

    let atom_cfg = AtomConfig {
        model,
        omega_r,
        omega_drive,
        omega_ma,
        omega_eb,
        gamma_drive,
        gamma_ma,
        gamma_eb,
        gp_m,
        gp_e,
        dephasing,
        temperature_kelvin,
    };
    if let Err(e) = atom_cfg.to_model() {
        let (name, message) = match &e {
            qfridge::Error::InvalidParameter { name, reason } => (*name, reason.clone()),
            other => ("atom", other.to_string()),
        };
        let key = match (name, model) {
            ("omega_ea", ModelKind::FourLevel) => "omega_em",
            ("gamma_ea", ModelKind::FourLevel) => "gamma_em",
            ("gp_a" | "gp_b", _) if matches!(dephasing, Dephasing::TargetUpsAb(_)) => "ups_ab",
            (n, _) => n,
        };
        let q = atom_field(a, key).or(atom_field(a, "omega_r"));
        let span = q.map(|s| s.span()).unwrap_or_else(|| atom.span());
        return Err(cx.err(span, &format!("atom.{key}"), message));
    }
    Ok(Some(SystemConfig { atom: atom_cfg, kappa, g_n, nbar }))
}

fn atom_field<'a>(a: &'a RawAtom, key: &str) -> Option<&'a Spanned<String>> {
    match key {
        "omega_r" => a.omega_r.as_ref(),
        "omega_ea" => a.omega_ea.as_ref(),
        "omega_em" => a.omega_em.as_ref(),
        "omega_ma" => a.omega_ma.as_ref(),
        // a derived omega_eb is reported at the gaps it was built from
        "omega_eb" => a.omega_eb.as_ref().or(a.omega_ea.as_ref()).or(a.omega_em.as_ref()),
        "gamma_ea" => a.gamma_ea.as_ref(),
        "gamma_em" => a.gamma_em.as_ref(),
        "gamma_ma" => a.gamma_ma.as_ref(),
        "gamma_eb" => a.gamma_eb.as_ref(),
        "gp_a" => a.gp_a.as_ref(),
        "gp_b" => a.gp_b.as_ref(),
        "gp_m" => a.gp_m.as_ref(),
        "gp_e" => a.gp_e.as_ref(),
        "ups_ab" => a.ups_ab.as_ref(),
        "temperature" => a.temperature.as_ref(),
        _ => None,
    }
}

fn parse_estimate(cx: &mut Ctx, e: &Spanned<RawEstimate>) -> Result<EstimateConfig, ConfigError> {
    let r = e.get_ref();
    let f = Dimension::Frequency;
    let omega_r = cx.required(&r.omega_r, "estimate.omega_r", f)?;
    let g_n = cx.required(&r.g_n, "estimate.g_n", f)?;
    let kappa = cx.required(&r.kappa, "estimate.kappa", f)?;
    cx.non_negative(&r.kappa, kappa, "estimate.kappa")?;
    let nbar = match &r.nbar {
        None => {
            cx.missing.push("estimate.nbar".into());
            f64::NAN
        }
        Some(n) if !(*n.get_ref() >= 0.0 && n.get_ref().is_finite()) => {
            return Err(cx.err(n.span(), "estimate.nbar", "must be finite and >= 0"))
        }
        Some(n) => *n.get_ref(),
    };
    let dephasing = match (&r.ups_ab, &r.doppler) {
        (Some(_), None) => EstimateDephasing::UpsAb(cx.required(&r.ups_ab, "estimate.ups_ab", f)?),
        (None, Some(d)) => {
            let dr = d.get_ref();
            let nu0 = cx.required(&dr.nu0, "estimate.doppler.nu0", f)?;
            let temperature_kelvin = cx.required(&dr.temperature, "estimate.doppler.temperature", Dimension::Temperature)?;
            let mass_amu = match &dr.mass_amu {
                None => {
                    cx.missing.push("estimate.doppler.mass_amu".into());
                    f64::NAN
                }
                Some(m) => *m.get_ref(),
            };
            EstimateDephasing::Doppler { nu0, temperature_kelvin, mass_amu }
        }
        (Some(u), Some(_)) => return Err(cx.err(u.span(), "estimate.ups_ab", "give either ups_ab or [estimate.doppler], not both")),
        (None, None) => {
            cx.missing.push("estimate.ups_ab (or [estimate.doppler])".into());
            EstimateDephasing::UpsAb(f64::NAN)
        }
    };
    let ups_eb = cx.quantity(&r.ups_eb, "estimate.ups_eb", f)?;
    let cfg = EstimateConfig { omega_r, g_n, kappa, nbar, dephasing, ups_eb };
    if cx.missing.is_empty() {
        if let Err(err) = cfg.input().and_then(|i| qfridge::harness::estimate_report(&i)) {
            return Err(cx.err(e.span(), "estimate", err.to_string()));
        }
    }
    Ok(cfg)
}

fn q(v: f64) -> String {
    toml::Value::String(format_quantity(v, Dimension::Frequency)).to_string()
}

fn k(v: f64) -> String {
    toml::Value::String(format_quantity(v, Dimension::Temperature)).to_string()
}

/// Canonical TOML text that parses back to `cfg`.
pub fn emit_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    if let Some(sys) = &cfg.system {
        let a = &sys.atom;
        let _ = writeln!(s, "model = \"{}\"\n\n[atom]", a.model.name());
        let _ = writeln!(s, "omega_r = {}", q(a.omega_r));
        match a.model {
            ModelKind::ThreeLevel => {
                let _ = writeln!(s, "omega_ea = {}", q(a.omega_drive));
            }
            ModelKind::FourLevel => {
                let _ = writeln!(s, "omega_em = {}\nomega_ma = {}", q(a.omega_drive), q(a.omega_ma));
            }
        }
        let _ = writeln!(s, "omega_eb = {}", q(a.omega_eb));
        match a.model {
            ModelKind::ThreeLevel => {
                let _ = writeln!(s, "gamma_ea = {}", q(a.gamma_drive));
            }
            ModelKind::FourLevel => {
                let _ = writeln!(s, "gamma_em = {}\ngamma_ma = {}", q(a.gamma_drive), q(a.gamma_ma));
            }
        }
        let _ = writeln!(s, "gamma_eb = {}", q(a.gamma_eb));
        match a.dephasing {
            Dephasing::TargetUpsAb(u) => {
                let _ = writeln!(s, "ups_ab = {}", q(u));
            }
            Dephasing::Rates { gp_a, gp_b } => {
                let _ = writeln!(s, "gp_a = {}\ngp_b = {}", q(gp_a), q(gp_b));
            }
        }
        if a.model == ModelKind::FourLevel {
            let _ = writeln!(s, "gp_m = {}", q(a.gp_m));
        }
        let _ = writeln!(s, "gp_e = {}", q(a.gp_e));
        let _ = writeln!(s, "temperature = {}", k(a.temperature_kelvin));
        let _ = writeln!(s, "\n[resonator]\nkappa = {}\ng_n = {}", q(sys.kappa), q(sys.g_n));
        if let Some(n) = sys.nbar {
            let _ = writeln!(s, "nbar = {n:?}");
        }
        s.push('\n');
    }
    let sw = &cfg.sweep;
    let _ = writeln!(
        s,
        "[sweep]\ndrive_min = {}\ndrive_max = {}\npoints = {}\nrate_source = \"{}\"\n",
        q(sw.drive_min),
        q(sw.drive_max),
        sw.points,
        sw.rate_source.name()
    );
    if let Some(e) = &cfg.estimate {
        let _ = writeln!(s, "[estimate]\nomega_r = {}\ng_n = {}\nkappa = {}\nnbar = {:?}", q(e.omega_r), q(e.g_n), q(e.kappa), e.nbar);
        if let Some(u) = e.ups_eb {
            let _ = writeln!(s, "ups_eb = {}", q(u));
        }
        match e.dephasing {
            EstimateDephasing::UpsAb(u) => {
                let _ = writeln!(s, "ups_ab = {}", q(u));
            }
            EstimateDephasing::Doppler { nu0, temperature_kelvin, mass_amu } => {
                let _ =
                    writeln!(s, "\n[estimate.doppler]\nnu0 = {}\ntemperature = {}\nmass_amu = {mass_amu:?}", q(nu0), k(temperature_kelvin));
            }
        }
        s.push('\n');
    }
    let sim = &cfg.simulate;
    let _ = writeln!(s, "[simulate]\npoints = {}", sim.points);
    if let Some(d) = sim.drive {
        let _ = writeln!(s, "drive = {}", q(d));
    }
    if let Some(n) = sim.n0 {
        let _ = writeln!(s, "n0 = {n:?}");
    }
    if let Some(t) = sim.t_final {
        let _ = writeln!(s, "t_final = {}", toml::Value::String(format_quantity(t, Dimension::Time)));
    }
    let _ = writeln!(s, "\n[output]\nformat = \"{}\"", cfg.output.format.name());
    if let Some(p) = &cfg.output.path {
        let _ = writeln!(s, "path = {}", toml::Value::String(p.clone()));
    }
    s
}
