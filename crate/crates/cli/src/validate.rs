//! Self-checks run by `qfridge validate`.

use qfridge::atom::{build_atom_liouvillian_3l, build_atom_liouvillian_4l, four, three, FourLevelParams, ThreeLevelParams};
use qfridge::c64;
use qfridge::composite::{composite_steady_state, suggest_fock_dim, AtomModel, CompositeSpec};
use qfridge::harness::{log_grid, presets, sweep_drive, RateSource};
use qfridge::operator::Operator;
use qfridge::rates::{rates_3l, rates_4l, steady_populations_3l, steady_populations_4l};
use qfridge::regression::{
    numeric_rates_full, numeric_rates_with_state, reduced_rates_3l, reduced_rates_4l, sigma_minus_3l, sigma_minus_4l,
};
use qfridge::resonator::{adaptive_steady_distribution, ResonatorParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pairwise tolerance of the three rate sources.
pub const RATE_TOLERANCE: f64 = 1e-8;
/// Tolerance of oracle-source sweeps against closed-form sweeps.
pub const SWEEP_TOLERANCE: f64 = 1e-6;
/// Composite against eliminated photon number at the largest coupling.
pub const ELIMINATION_TOLERANCE: f64 = 0.05;
/// Minimum shrink factor of the elimination error per halving of `g`.
pub const LADDER_RATIO: f64 = 4.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }

    fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn desk_3l(drive: f64) -> ThreeLevelParams {
    ThreeLevelParams {
        omega_r: 1.0,
        omega_ea: 3.0,
        omega_eb: 4.0,
        gamma_ea: 1.0,
        gamma_eb: 0.7,
        gp_a: 0.05,
        gp_b: 0.03,
        gp_e: 0.02,
        temperature: 1.5,
        drive,
    }
}

pub fn desk_4l(drive: f64) -> FourLevelParams {
    FourLevelParams {
        omega_r: 1.0,
        omega_em: 2.0,
        omega_ma: 1.5,
        omega_eb: 4.5,
        gamma_em: 1.0,
        gamma_ma: 0.8,
        gamma_eb: 0.6,
        gp_a: 0.05,
        gp_b: 0.03,
        gp_m: 0.01,
        gp_e: 0.02,
        temperature: 1.2,
        drive,
    }
}

/// Largest pairwise relative difference of `(closed, reduced, full)` for both rates.
type Triples = [(f64, f64, f64); 2];

fn worst(rows: impl IntoIterator<Item = qfridge::Result<Triples>>) -> qfridge::Result<(f64, usize)> {
    let mut max: f64 = 0.0;
    let mut n = 0;
    for row in rows {
        for (c, r, f) in row? {
            max = max.max(rel(c, r)).max(rel(c, f)).max(rel(r, f));
        }
        n += 1;
    }
    Ok((max, n))
}

fn rate_check(name: &str, result: qfridge::Result<(f64, usize)>) -> Check {
    match result {
        Ok((max, n)) => Check::new(name, max <= RATE_TOLERANCE, format!("max rel err {max:.3e} over {n} drives (tol {RATE_TOLERANCE:e})")),
        Err(e) => Check::failed(name, e),
    }
}

fn three_way_3l(p: &ThreeLevelParams, g: f64, numeric_state: bool) -> qfridge::Result<Triples> {
    let c = rates_3l(p, g)?;
    let (rp, rm) = reduced_rates_3l(p, g)?;
    let l = build_atom_liouvillian_3l(p)?;
    let (fp, fm) = if numeric_state {
        numeric_rates_full(&l, &sigma_minus_3l(), g)?
    } else {
        let rho = steady_populations_3l(p)?.density_matrix(three::E, three::A);
        numeric_rates_with_state(&l, &rho, &sigma_minus_3l(), g)?
    };
    Ok([(c.a_plus, rp, fp), (c.a_minus, rm, fm)])
}

fn three_way_4l(p: &FourLevelParams, g: f64, numeric_state: bool) -> qfridge::Result<Triples> {
    let c = rates_4l(p, g)?;
    let (rp, rm) = reduced_rates_4l(p, g)?;
    let l = build_atom_liouvillian_4l(p)?;
    let (fp, fm) = if numeric_state {
        numeric_rates_full(&l, &sigma_minus_4l(), g)?
    } else {
        let rho = steady_populations_4l(p)?.density_matrix(four::E, four::M);
        numeric_rates_with_state(&l, &rho, &sigma_minus_4l(), g)?
    };
    Ok([(c.a_plus, rp, fp), (c.a_minus, rm, fm)])
}

/// Three-way agreement of the rate sources at desk scale and for the optical presets.
pub fn rate_equivalence(points: usize) -> Vec<Check> {
    let desk = log_grid(1e-3, 1e4, points).expect("grid");
    let optical_numeric = log_grid(0.1, 1e4, points).expect("grid");
    let optical_wide = log_grid(1e-16, 1e4, points).expect("grid");
    let g = 0.2;
    let mut out = vec![
        rate_check("three-way rates, 3L desk", worst(desk.iter().map(|&d| three_way_3l(&desk_3l(d), g, true)))),
        rate_check("three-way rates, 4L desk", worst(desk.iter().map(|&d| three_way_4l(&desk_4l(d), g, true)))),
    ];
    let g = presets::G_N_MHZ;
    match (presets::three_level_optical(), presets::four_level_optical()) {
        (Ok(p3), Ok(p4)) => {
            out.push(rate_check(
                "three-way rates, 3L optical, numerical state",
                worst(optical_numeric.iter().map(|&d| three_way_3l(&p3.with_drive(d), g, true))),
            ));
            out.push(rate_check(
                "three-way rates, 3L optical, closed-form state",
                worst(optical_wide.iter().map(|&d| three_way_3l(&p3.with_drive(d), g, false))),
            ));
            out.push(rate_check(
                "three-way rates, 4L optical, closed-form state",
                worst(optical_wide.iter().map(|&d| three_way_4l(&p4.with_drive(d), g, false))),
            ));
        }
        (Err(e), _) | (_, Err(e)) => out.push(Check::failed("three-way rates, optical", e)),
    }
    out
}

/// Oracle-source sweeps reproduce closed-form sweeps on the shipped grids.
pub fn oracle_sweeps() -> Vec<Check> {
    let mut out = Vec::new();
    for (name, spec) in [("oracle sweep, fig2a", presets::fig2a()), ("oracle sweep, fig2b", presets::fig2b())] {
        let check = (|| -> qfridge::Result<Check> {
            let mut spec = spec?;
            let closed = sweep_drive(&spec)?;
            spec.rate_source = RateSource::RegressionOracle;
            let oracle = sweep_drive(&spec)?;
            let failed = closed.iter().chain(&oracle).filter(|r| !r.is_ok()).count();
            let max = closed.iter().zip(&oracle).map(|(c, o)| rel(c.n_ss, o.n_ss)).fold(0.0, f64::max);
            Ok(Check::new(
                name,
                failed == 0 && max <= SWEEP_TOLERANCE,
                format!("max rel err {max:.3e} over {} rows, {failed} failed rows (tol {SWEEP_TOLERANCE:e})", closed.len()),
            ))
        })();
        out.push(check.unwrap_or_else(|e| Check::failed(name, e)));
    }
    out
}

/// Desk-scale atom for the composite comparison.
pub fn composite_atom() -> ThreeLevelParams {
    ThreeLevelParams {
        omega_r: 1.0,
        omega_ea: 3.0,
        omega_eb: 4.0,
        gamma_ea: 1.0,
        gamma_eb: 1.0,
        gp_a: 0.05,
        gp_b: 0.05,
        gp_e: 0.0,
        temperature: 1.0 / 3f64.ln(),
        drive: 1.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderStep {
    pub g: f64,
    pub predicted: f64,
    pub composite: f64,
}

impl LadderStep {
    pub fn discrepancy(&self) -> f64 {
        (self.composite - self.predicted).abs() / self.predicted
    }
}

/// Composite against eliminated photon number for each `g`, with `n̄_R` and `κ` fixed.
pub fn elimination_ladder(atom: &ThreeLevelParams, kappa: f64, nbar: f64, couplings: &[f64]) -> qfridge::Result<Vec<LadderStep>> {
    let mut p = *atom;
    // the atom sits at the resonator temperature
    p.temperature = p.omega_r / (1.0 / nbar).ln_1p();
    couplings
        .iter()
        .map(|&g| {
            let predicted = rates_3l(&p, g)?.with_resonator(kappa, nbar)?.n_ss_predicted.unwrap_or(f64::NAN);
            let spec = CompositeSpec { atom: AtomModel::Three(p), kappa, nbar_r: nbar, g, fock_dim: suggest_fock_dim(nbar, 2) };
            let composite = composite_steady_state(&spec)?.mean_photon;
            Ok(LadderStep { g, predicted, composite })
        })
        .collect()
}

pub fn elimination(quick: bool) -> Check {
    let name = "composite vs eliminated";
    let (nbar, couplings): (f64, &[f64]) = if quick { (0.1, &[1e-2, 5e-3]) } else { (0.5, &[1e-2, 5e-3, 2.5e-3]) };
    match elimination_ladder(&composite_atom(), 1e-3, nbar, couplings) {
        Err(e) => Check::failed(name, e),
        Ok(steps) => {
            let d: Vec<f64> = steps.iter().map(LadderStep::discrepancy).collect();
            let ratios: Vec<f64> = d.windows(2).map(|w| w[0] / w[1]).collect();
            let passed = d[0] <= ELIMINATION_TOLERANCE && ratios.iter().all(|&r| r >= LADDER_RATIO);
            let detail = format!(
                "nbar {nbar}, rel discrepancy {} at g = {}, shrink ratios {} (need <= {ELIMINATION_TOLERANCE} and >= {LADDER_RATIO})",
                d.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", "),
                couplings.iter().map(|g| format!("{g:e}")).collect::<Vec<_>>().join(", "),
                ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", "),
            );
            Check::new(name, passed, detail)
        }
    }
}

fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    let a = Operator::from_fn(dim, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &a * &a.adjoint();
    let tr = m.trace().re;
    m.scaled(c64::new(1.0 / tr, 0.0))
}

fn random_3l(rng: &mut ChaCha8Rng) -> ThreeLevelParams {
    let omega_r = rng.random_range(0.2..3.0);
    let omega_ea = rng.random_range(0.5..5.0);
    ThreeLevelParams {
        omega_r,
        omega_ea,
        omega_eb: omega_ea + omega_r,
        gamma_ea: rng.random_range(0.1..2.0),
        gamma_eb: rng.random_range(0.1..2.0),
        gp_a: rng.random_range(0.0..0.3),
        gp_b: rng.random_range(0.0..0.3),
        gp_e: rng.random_range(0.0..0.3),
        temperature: rng.random_range(0.3..5.0),
        drive: rng.random_range(0.0..20.0),
    }
}

fn random_4l(rng: &mut ChaCha8Rng) -> FourLevelParams {
    let (omega_r, omega_em, omega_ma) = (rng.random_range(0.2..3.0), rng.random_range(0.5..4.0), rng.random_range(0.5..4.0));
    FourLevelParams {
        omega_r,
        omega_em,
        omega_ma,
        omega_eb: omega_em + omega_ma + omega_r,
        gamma_em: rng.random_range(0.1..2.0),
        gamma_ma: rng.random_range(0.1..2.0),
        gamma_eb: rng.random_range(0.1..2.0),
        gp_a: rng.random_range(0.0..0.3),
        gp_b: rng.random_range(0.0..0.3),
        gp_m: rng.random_range(0.0..0.3),
        gp_e: rng.random_range(0.0..0.3),
        temperature: rng.random_range(0.3..5.0),
        drive: rng.random_range(0.0..20.0),
    }
}

/// Trace and Hermiticity preservation, Boltzmann bath ratios, population
/// simplex, and the geometric photon distribution, on seeded random samples.
pub fn invariants(cases: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut gen_err: f64 = 0.0;
    let mut bath_err: f64 = 0.0;
    let mut simplex_err: f64 = 0.0;
    let mut geo_err: f64 = 0.0;
    let mut failure = None;
    for _ in 0..cases {
        let r = (|| -> qfridge::Result<()> {
            let p = random_3l(&mut rng);
            let q = random_4l(&mut rng);
            for (l, rho) in [
                (build_atom_liouvillian_3l(&p)?, random_density(&mut rng, 3)),
                (build_atom_liouvillian_4l(&q)?, random_density(&mut rng, 4)),
            ] {
                let out = l.apply(&rho)?;
                gen_err = gen_err.max(out.trace().norm() / l.norm()).max(out.hermiticity_error() / l.norm());
            }
            for (bath, gap, t) in [
                (p.bath_ea()?, p.omega_ea, p.temperature),
                (p.bath_eb()?, p.omega_eb, p.temperature),
                (q.bath_ma()?, q.omega_ma, q.temperature),
            ] {
                bath_err = bath_err.max(rel(bath.gamma_plus / bath.gamma_minus, (-gap / t).exp()));
            }
            for pops in [steady_populations_3l(&p)?.pops, steady_populations_4l(&q)?.pops] {
                let outside = pops.iter().map(|&x| (-x).max(x - 1.0).max(0.0)).fold(0.0, f64::max);
                simplex_err = simplex_err.max(outside).max((pops.iter().sum::<f64>() - 1.0).abs());
            }
            let rp = ResonatorParams {
                kappa: rng.random_range(0.05..1.0),
                nbar_r: rng.random_range(0.0..5.0),
                a_plus: rng.random_range(0.0..1.0),
                a_minus: rng.random_range(1.0..3.0),
            };
            let dist = adaptive_steady_distribution(&rp)?;
            let ratio = rp.up_rate() / rp.down_rate();
            for (k, pk) in dist.probs.iter().enumerate().take(30) {
                geo_err = geo_err.max((pk - (1.0 - ratio) * ratio.powi(k as i32)).abs());
            }
            Ok(())
        })();
        if let Err(e) = r {
            failure = Some(e);
            break;
        }
    }
    if let Some(e) = failure {
        return vec![Check::failed("invariants", e)];
    }
    vec![
        Check::new(
            "trace and Hermiticity preservation",
            gen_err < 1e-12,
            format!("max relative violation {gen_err:.3e} over {cases} samples"),
        ),
        Check::new("Boltzmann bath ratio", bath_err < 1e-12, format!("max rel err {bath_err:.3e}")),
        Check::new("population simplex", simplex_err < 1e-14, format!("max violation {simplex_err:.3e}")),
        Check::new("geometric photon distribution", geo_err < 1e-10, format!("max abs err {geo_err:.3e}")),
    ]
}

/// Every check; `quick` shrinks grids and the composite problem.
pub fn run_validation(quick: bool) -> Vec<Check> {
    let mut out = rate_equivalence(if quick { 12 } else { 60 });
    out.extend(oracle_sweeps());
    out.push(elimination(quick));
    out.extend(invariants(if quick { 16 } else { 200 }));
    out
}
