//! Closed-form rates, reduced regression integrals, and correlation integrals of
//! the full atom Liouvillian must agree pairwise.

use qfridge::atom::{build_atom_liouvillian_3l, build_atom_liouvillian_4l, four, three, FourLevelParams, ThreeLevelParams};
use qfridge::harness::{log_grid, presets};
use qfridge::rates::{rates_3l, rates_4l, steady_populations_3l, steady_populations_4l};
use qfridge::regression::{
    numeric_rates_full, numeric_rates_with_state, reduced_rates_3l, reduced_rates_4l, sigma_minus_3l, sigma_minus_4l,
};

const TOL: f64 = 1e-8;
const POINTS: usize = 60;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn desk_3l(drive: f64) -> ThreeLevelParams {
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

fn desk_4l(drive: f64) -> FourLevelParams {
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

struct Worst(f64, f64);

impl Worst {
    fn check(&mut self, drive: f64, triples: [(f64, f64, f64); 2]) {
        for (c, r, f) in triples {
            for e in [rel(c, r), rel(c, f), rel(r, f)] {
                if e > self.0 {
                    self.0 = e;
                    self.1 = drive;
                }
            }
        }
    }

    fn assert(&self, what: &str) {
        assert!(self.0 <= TOL, "{what}: worst relative error {:.3e} at drive {}", self.0, self.1);
    }
}

#[test]
fn desk_three_level() {
    let g = 0.2;
    let mut worst = Worst(0.0, 0.0);
    for drive in log_grid(1e-3, 1e4, POINTS).unwrap() {
        let p = desk_3l(drive);
        let c = rates_3l(&p, g).unwrap();
        let (rp, rm) = reduced_rates_3l(&p, g).unwrap();
        let (fp, fm) = numeric_rates_full(&build_atom_liouvillian_3l(&p).unwrap(), &sigma_minus_3l(), g).unwrap();
        worst.check(drive, [(c.a_plus, rp, fp), (c.a_minus, rm, fm)]);
    }
    worst.assert("3L desk");
}

#[test]
fn desk_four_level() {
    let g = 0.2;
    let mut worst = Worst(0.0, 0.0);
    for drive in log_grid(1e-3, 1e4, POINTS).unwrap() {
        let p = desk_4l(drive);
        let c = rates_4l(&p, g).unwrap();
        let (rp, rm) = reduced_rates_4l(&p, g).unwrap();
        let (fp, fm) = numeric_rates_full(&build_atom_liouvillian_4l(&p).unwrap(), &sigma_minus_4l(), g).unwrap();
        worst.check(drive, [(c.a_plus, rp, fp), (c.a_minus, rm, fm)]);
        // single decaying variable: A± = 2g² N_{a,b} / Υ'_ab
        assert!(rel(fp, 2.0 * g * g * c.pops[four::A] / c.ups_ab) < TOL);
    }
    worst.assert("4L desk");
}

/// Optical three-level atom at room temperature, with the numerical steady state
/// where the null space is resolvable.
#[test]
fn optical_three_level_numerical_state() {
    let base = presets::three_level_optical().unwrap();
    let g = presets::G_N_MHZ;
    let mut worst = Worst(0.0, 0.0);
    for drive in log_grid(0.1, 1e4, POINTS).unwrap() {
        let p = base.with_drive(drive);
        let c = rates_3l(&p, g).unwrap();
        let (rp, rm) = reduced_rates_3l(&p, g).unwrap();
        let (fp, fm) = numeric_rates_full(&build_atom_liouvillian_3l(&p).unwrap(), &sigma_minus_3l(), g).unwrap();
        worst.check(drive, [(c.a_plus, rp, fp), (c.a_minus, rm, fm)]);
    }
    worst.assert("3L optical");
}

/// Optical atoms over the full sweep range. The room-temperature populations
/// span hundreds of decades, so the state comes from the closed form and the
/// full Liouvillian supplies the correlation dynamics.
#[test]
fn optical_full_range_closed_state() {
    let g = presets::G_N_MHZ;
    let base3 = presets::three_level_optical().unwrap();
    let base4 = presets::four_level_optical().unwrap();
    let mut w3 = Worst(0.0, 0.0);
    let mut w4 = Worst(0.0, 0.0);
    for drive in log_grid(1e-16, 1e4, POINTS).unwrap() {
        let p = base3.with_drive(drive);
        let c = rates_3l(&p, g).unwrap();
        let (rp, rm) = reduced_rates_3l(&p, g).unwrap();
        let rho = steady_populations_3l(&p).unwrap().density_matrix(three::E, three::A);
        let (fp, fm) = numeric_rates_with_state(&build_atom_liouvillian_3l(&p).unwrap(), &rho, &sigma_minus_3l(), g).unwrap();
        w3.check(drive, [(c.a_plus, rp, fp), (c.a_minus, rm, fm)]);

        let q = base4.with_drive(drive);
        let c = rates_4l(&q, g).unwrap();
        let (rp, rm) = reduced_rates_4l(&q, g).unwrap();
        let rho = steady_populations_4l(&q).unwrap().density_matrix(four::E, four::M);
        let (fp, fm) = numeric_rates_with_state(&build_atom_liouvillian_4l(&q).unwrap(), &rho, &sigma_minus_4l(), g).unwrap();
        w4.check(drive, [(c.a_plus, rp, fp), (c.a_minus, rm, fm)]);
    }
    w3.assert("3L optical, closed state");
    w4.assert("4L optical, closed state");
}
