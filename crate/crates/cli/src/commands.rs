//! Subcommand bodies. Each returns whether every row or check succeeded.

use std::fmt::Write as _;
use std::io::Write;

use qfridge::composite::AtomModel;
use qfridge::harness::{
    estimate_report, find_minimum, sweep_drive, EstimateInput, EstimateReport, Minimum, RateSource, SweepRow, SweepSpec,
};
use qfridge::rates::{Dephasing3, Dephasing4};
use qfridge::resonator::{birth_death_generator, PhotonDistribution, ResonatorParams};

use crate::config::{Format, RunConfig, SystemConfig};
use crate::validate::Check;

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qfridge::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type CommandResult<T> = Result<T, CommandError>;

fn system(cfg: &RunConfig, what: &str) -> CommandResult<SystemConfig> {
    cfg.system.ok_or_else(|| CommandError::Usage(format!("`{what}` needs `model`, [atom] and [resonator] in the configuration")))
}

fn level_names(model: &AtomModel) -> &'static [&'static str] {
    match model {
        AtomModel::Three(_) => &["b", "a", "e"],
        AtomModel::Four(_) => &["b", "a", "m", "e"],
    }
}

/// Input parameters repeated on every row, in MHz unless named otherwise.
fn parameter_columns(spec: &SweepSpec) -> Vec<(String, String)> {
    let f = |v: f64| format!("{v:?}");
    let mut cols = vec![];
    match spec.model {
        AtomModel::Three(p) => {
            cols.push(("model".into(), "three_level".into()));
            for (k, v) in [
                ("omega_r_mhz", p.omega_r),
                ("omega_ea_mhz", p.omega_ea),
                ("omega_eb_mhz", p.omega_eb),
                ("gamma_ea_mhz", p.gamma_ea),
                ("gamma_eb_mhz", p.gamma_eb),
                ("gp_a_mhz", p.gp_a),
                ("gp_b_mhz", p.gp_b),
                ("gp_e_mhz", p.gp_e),
                ("temperature_mhz", p.temperature),
            ] {
                cols.push((k.into(), f(v)));
            }
        }
        AtomModel::Four(p) => {
            cols.push(("model".into(), "four_level".into()));
            for (k, v) in [
                ("omega_r_mhz", p.omega_r),
                ("omega_em_mhz", p.omega_em),
                ("omega_ma_mhz", p.omega_ma),
                ("omega_eb_mhz", p.omega_eb),
                ("gamma_em_mhz", p.gamma_em),
                ("gamma_ma_mhz", p.gamma_ma),
                ("gamma_eb_mhz", p.gamma_eb),
                ("gp_a_mhz", p.gp_a),
                ("gp_b_mhz", p.gp_b),
                ("gp_m_mhz", p.gp_m),
                ("gp_e_mhz", p.gp_e),
                ("temperature_mhz", p.temperature),
            ] {
                cols.push((k.into(), f(v)));
            }
        }
    }
    cols.push(("kappa_mhz".into(), f(spec.kappa)));
    cols.push(("nbar_r".into(), f(spec.nbar_r)));
    cols.push(("g_n_mhz".into(), f(spec.g_n)));
    cols.push(("rate_source".into(), spec.rate_source.name().into()));
    cols
}

/// Table with fixed result columns, then populations, then the inputs.
pub fn write_sweep<W: Write>(out: W, spec: &SweepSpec, rows: &[SweepRow], format: Format) -> CommandResult<()> {
    let mut w = csv::WriterBuilder::new().delimiter(format.delimiter()).from_writer(out);
    let levels = level_names(&spec.model);
    let params = parameter_columns(spec);
    let mut header: Vec<String> = ["drive_mhz", "a_plus_mhz", "a_minus_mhz", "n_ss", "t_eff_k"].iter().map(|s| s.to_string()).collect();
    header.extend(levels.iter().map(|l| format!("pop_{l}")));
    header.push("error".into());
    header.extend(params.iter().map(|(k, _)| k.clone()));
    w.write_record(&header)?;
    for r in rows {
        let f = |v: f64| format!("{v:?}");
        let mut rec = vec![f(r.drive), f(r.a_plus), f(r.a_minus), f(r.n_ss), f(r.effective_temperature_kelvin)];
        for i in 0..levels.len() {
            rec.push(r.populations.get(i).map_or_else(|| "NaN".to_string(), |&p| f(p)));
        }
        rec.push(r.error.clone().unwrap_or_default());
        rec.extend(params.iter().map(|(_, v)| v.clone()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub struct SweepOutcome {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub minimum: Option<Minimum>,
}

impl SweepOutcome {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

pub fn sweep(cfg: &RunConfig, source: Option<RateSource>) -> CommandResult<SweepOutcome> {
    let sys = system(cfg, "sweep")?;
    let mut sweep_cfg = cfg.sweep;
    if let Some(s) = source {
        sweep_cfg.rate_source = s;
    }
    let spec = sys.sweep_spec(&sweep_cfg)?;
    let rows = sweep_drive(&spec)?;
    let objective = |d: f64| spec.n_ss_at(d);
    let minimum = find_minimum(&rows, Some(&objective)).ok();
    Ok(SweepOutcome { spec, rows, minimum })
}

/// Summary line for stderr.
pub fn describe_minimum(m: &Option<Minimum>) -> String {
    match m {
        None => "minimum: not enough successful rows".into(),
        Some(m) => format!(
            "minimum n_ss = {:?} at drive {:?} MHz{}",
            m.n_ss,
            m.drive,
            if m.at_boundary { " (grid boundary: curve is monotone over the grid)" } else { "" }
        ),
    }
}

/// Estimate inputs: the [estimate] section, or the atom and resonator sections.
pub fn estimate_input(cfg: &RunConfig) -> CommandResult<EstimateInput> {
    if let Some(e) = &cfg.estimate {
        return Ok(e.input()?);
    }
    let sys = system(cfg, "limit")?;
    let (ups_ab, ups_eb) = match sys.atom.to_model()? {
        AtomModel::Three(p) => {
            let d = Dephasing3::new(&p)?;
            (d.ups_ab, Some(d.ups_eb))
        }
        AtomModel::Four(p) => (Dephasing4::new(&p)?.ups_ab, None),
    };
    Ok(EstimateInput { omega_r: sys.atom.omega_r, g_n: sys.g_n, kappa: sys.kappa, ups_ab, nbar_r: sys.nbar_r()?, ups_eb })
}

pub fn limit(cfg: &RunConfig) -> CommandResult<EstimateReport> {
    Ok(estimate_report(&estimate_input(cfg)?)?)
}

/// Report as TOML, all values in full precision.
pub fn format_report(r: &EstimateReport) -> String {
    let mut s = String::new();
    let i = &r.input;
    let _ = writeln!(s, "[input]");
    let _ = writeln!(s, "omega_r_mhz = {:?}", i.omega_r);
    let _ = writeln!(s, "g_n_mhz = {:?}", i.g_n);
    let _ = writeln!(s, "kappa_mhz = {:?}", i.kappa);
    let _ = writeln!(s, "ups_ab_mhz = {:?}", i.ups_ab);
    if let Some(u) = i.ups_eb {
        let _ = writeln!(s, "ups_eb_mhz = {u:?}");
    }
    let _ = writeln!(s, "nbar_r = {:?}", i.nbar_r);
    let _ = writeln!(s, "\n[limit]");
    let _ = writeln!(s, "n_ss_exact = {:?}", r.limit_exact);
    let _ = writeln!(s, "n_ss_approx = {:?}", r.limit_approx);
    let _ = writeln!(s, "t_eff_exact_k = {:?}", r.effective_temperature_exact_kelvin);
    let _ = writeln!(s, "t_eff_approx_k = {:?}", r.effective_temperature_approx_kelvin);
    if let Some(b) = r.working_region_bound {
        let _ = writeln!(s, "working_region_bound_mhz = {b:?}");
    }
    let _ = writeln!(s, "ideal_cavity = {}", r.ideal_cavity);
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub t_us: f64,
    pub n_mean: f64,
    pub n_chain: Option<f64>,
}

pub struct SimulateOptions {
    pub t_final: Option<f64>,
    pub points: Option<usize>,
    pub drive: Option<f64>,
    pub n0: Option<f64>,
    /// Also evolve the truncated photon-number chain from a Fock state.
    pub chain: bool,
}

/// Relaxation of `⟨n⟩(t)` from `n0` at a fixed drive.
pub fn simulate(cfg: &RunConfig, opts: &SimulateOptions) -> CommandResult<(ResonatorParams, Vec<TracePoint>)> {
    let sys = system(cfg, "simulate")?;
    let drive = opts
        .drive
        .or(cfg.simulate.drive)
        .ok_or_else(|| CommandError::Usage("`simulate` needs a drive: [simulate] drive or --drive".into()))?;
    let spec = sys.sweep_spec(&cfg.sweep)?;
    let (a_plus, a_minus, _) = spec.rates_at(drive)?;
    let rp = ResonatorParams { kappa: spec.kappa, nbar_r: spec.nbar_r, a_plus, a_minus };
    let n_ss = rp.steady_photon_number()?;
    let n0 = opts.n0.or(cfg.simulate.n0).unwrap_or(spec.nbar_r);
    let t_final = opts.t_final.or(cfg.simulate.t_final).unwrap_or(5.0 / rp.net_damping());
    let points = opts.points.unwrap_or(cfg.simulate.points);
    if points < 2 || !(t_final > 0.0) {
        return Err(CommandError::Usage(format!("need points >= 2 and t_final > 0, got {points} and {t_final}")));
    }
    let times: Vec<f64> = (0..points).map(|k| t_final * k as f64 / (points - 1) as f64).collect();
    let chain = if opts.chain {
        if n0.fract() != 0.0 {
            return Err(CommandError::Usage(format!("--chain starts from a Fock state; n0 = {n0} is not an integer")));
        }
        let top = n0.max(n_ss);
        let n_max = qfridge::composite::suggest_fock_dim(top, 2) + 4 * top.sqrt().ceil() as usize + n0 as usize;
        let gen = birth_death_generator(&rp, n_max)?;
        let p0 = PhotonDistribution::fock(n0 as usize, n_max)?;
        Some((gen, p0))
    } else {
        None
    };
    let mut out = Vec::with_capacity(points);
    for &t in &times {
        let n_chain = match &chain {
            Some((gen, p0)) => Some(gen.evolve(p0, t)?.mean()),
            None => None,
        };
        out.push(TracePoint { t_us: t, n_mean: rp.transient_mean_photon(n0, t)?, n_chain });
    }
    Ok((rp, out))
}

pub fn write_trace<W: Write>(out: W, trace: &[TracePoint], format: Format) -> CommandResult<()> {
    let mut w = csv::WriterBuilder::new().delimiter(format.delimiter()).from_writer(out);
    let chain = trace.first().is_some_and(|p| p.n_chain.is_some());
    let mut header = vec!["t_us", "n_mean"];
    if chain {
        header.push("n_mean_chain");
    }
    w.write_record(&header)?;
    for p in trace {
        let mut rec = vec![format!("{:?}", p.t_us), format!("{:?}", p.n_mean)];
        if let Some(c) = p.n_chain {
            rec.push(format!("{c:?}"));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn format_checks(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(s, "{c}");
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(s, "{passed}/{} checks passed", checks.len());
    s
}
