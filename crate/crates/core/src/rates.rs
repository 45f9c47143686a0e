//! Closed-form steady states, heating/cooling rates, and cooling limits.

use faer::c64;
use serde::Serialize;

use crate::atom::{boltzmann_factor, FourLevelParams, ThreeLevelParams};
use crate::error::{invalid, Result};
use crate::operator::Operator;
use crate::units;

/// Coherence decay rates `Υ` of the three-level atom.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Dephasing3 {
    pub ups_ab: f64,
    pub ups_ea: f64,
    pub ups_eb: f64,
}

impl Dephasing3 {
    pub fn new(p: &ThreeLevelParams) -> Result<Self> {
        let ea = p.bath_ea()?;
        let eb = p.bath_eb()?;
        Ok(Self {
            ups_ab: 0.5 * (ea.gamma_plus + eb.gamma_plus + p.gp_a + p.gp_b),
            ups_eb: 0.5 * (ea.gamma_minus + eb.gamma_minus + eb.gamma_plus + p.gp_e + p.gp_b),
            ups_ea: 0.5 * (ea.gamma_plus + ea.gamma_minus + eb.gamma_minus + p.gp_e + p.gp_a),
        })
    }
}

/// Coherence decay rates `Υ'` of the four-level atom.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Dephasing4 {
    pub ups_ab: f64,
    pub ups_em: f64,
}

impl Dephasing4 {
    pub fn new(p: &FourLevelParams) -> Result<Self> {
        let em = p.bath_em()?;
        let ma = p.bath_ma()?;
        let eb = p.bath_eb()?;
        Ok(Self {
            ups_ab: 0.5 * (eb.gamma_plus + ma.gamma_plus + p.gp_a + p.gp_b),
            ups_em: 0.5 * (em.gamma_plus + em.gamma_minus + eb.gamma_minus + ma.gamma_minus + p.gp_e + p.gp_m),
        })
    }
}

/// Steady level populations (indexed as in [`crate::atom`]) and the drive coherence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteadyAtom {
    pub pops: Vec<f64>,
    /// `⟨τ⁻⟩` on the driven transition (`e ↔ a` or `e ↔ m`).
    pub coherence: c64,
}

impl SteadyAtom {
    /// Density matrix with the coherence placed on `upper ↔ lower`, where
    /// `⟨τ⁻⟩ = ρ[upper, lower]`.
    pub fn density_matrix(&self, upper: usize, lower: usize) -> Operator {
        let mut rho = Operator::diagonal(&self.pops);
        rho.set(upper, lower, self.coherence);
        rho.set(lower, upper, self.coherence.conj());
        rho
    }
}

/// Heating and cooling rates at one operating point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub a_plus: f64,
    pub a_minus: f64,
    pub pops: Vec<f64>,
    pub coherence: c64,
    /// Coherence decay rate of the microwave transition (`Υ_ab` or `Υ'_ab`).
    pub ups_ab: f64,
    pub n_ss_predicted: Option<f64>,
}

impl RateReport {
    /// Attach the steady photon number for a resonator with damping `kappa`
    /// and thermal occupation `nbar_r`.
    pub fn with_resonator(mut self, kappa: f64, nbar_r: f64) -> Result<Self> {
        let rp = crate::resonator::ResonatorParams { kappa, nbar_r, a_plus: self.a_plus, a_minus: self.a_minus };
        self.n_ss_predicted = Some(rp.steady_photon_number()?);
        Ok(self)
    }
}

fn normalize(w: &[f64]) -> Vec<f64> {
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

/// Steady state of the driven three-level atom.
///
/// `N_a/N_b` is evaluated as `e^{−ω_R/T}(Γ⁺_ea + W e^{−Ω_ea/T})/(Γ⁺_ea + W)`
/// with `W = Ω²/2Υ_ea`, which equals the textbook ratio but never forms `e^{+Ω/T}`.
pub fn steady_populations_3l(p: &ThreeLevelParams) -> Result<SteadyAtom> {
    p.validate()?;
    let ups = Dephasing3::new(p)?;
    let ea = p.bath_ea()?;
    let t = p.temperature;
    let w = if p.drive == 0.0 { 0.0 } else { p.drive * p.drive / (2.0 * ups.ups_ea) };
    let boltz_r = boltzmann_factor(p.omega_r, t);
    let den = ea.gamma_plus + w;
    let w_a = if den == 0.0 { boltz_r } else { boltz_r * (ea.gamma_plus + w * boltzmann_factor(p.omega_ea, t)) / den };
    let w_e = boltzmann_factor(p.omega_eb, t);
    let pops = normalize(&[1.0, w_a, w_e]);
    let coherence = c64::new(0.0, p.drive / (2.0 * ups.ups_ea)) * (pops[2] - pops[1]);
    Ok(SteadyAtom { pops, coherence })
}

/// Steady state of the driven four-level atom.
///
/// Uses `N_e/N_b = e^{−Ω_eb/T}`, `N_m/N_a = e^{−Ω_ma/T}` and
/// `N_e/N_m = (Γ⁺_em + W')/(Γ⁻_em + W')` with `W' = Ω²/2Υ'_em`, rearranged so
/// that only decaying exponentials appear.
pub fn steady_populations_4l(p: &FourLevelParams) -> Result<SteadyAtom> {
    p.validate()?;
    let ups = Dephasing4::new(p)?;
    let em = p.bath_em()?;
    let t = p.temperature;
    let w = if p.drive == 0.0 { 0.0 } else { p.drive * p.drive / (2.0 * ups.ups_em) };
    let boltz_r = boltzmann_factor(p.omega_r, t);
    let den = em.gamma_plus + w;
    let w_a = if den == 0.0 { boltz_r } else { boltz_r * (em.gamma_plus + w * boltzmann_factor(p.omega_em, t)) / den };
    let w_m = w_a * boltzmann_factor(p.omega_ma, t);
    let w_e = boltzmann_factor(p.omega_eb, t);
    let pops = normalize(&[1.0, w_a, w_m, w_e]);
    let coherence = c64::new(0.0, p.drive / (2.0 * ups.ups_em)) * (pops[3] - pops[2]);
    Ok(SteadyAtom { pops, coherence })
}

fn check_coupling(g: f64) -> Result<()> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(invalid("g", format!("coupling must be positive and finite, got {g}")));
    }
    Ok(())
}

/// Heating and cooling rates of the three-level refrigerator.
pub fn rates_3l(p: &ThreeLevelParams, g: f64) -> Result<RateReport> {
    check_coupling(g)?;
    let ss = steady_populations_3l(p)?;
    let ups = Dephasing3::new(p)?;
    let omega = p.drive;
    let prefactor = 2.0 * g * g / (ups.ups_ab + omega * omega / (4.0 * ups.ups_eb));
    let tau_plus = ss.coherence.conj();
    let feed = c64::new(ss.pops[1], 0.0) + c64::new(0.0, omega / (2.0 * ups.ups_eb)) * tau_plus;
    Ok(RateReport {
        a_plus: prefactor * feed.re,
        a_minus: prefactor * ss.pops[0],
        pops: ss.pops,
        coherence: ss.coherence,
        ups_ab: ups.ups_ab,
        n_ss_predicted: None,
    })
}

/// Heating and cooling rates of the four-level refrigerator.
pub fn rates_4l(p: &FourLevelParams, g: f64) -> Result<RateReport> {
    check_coupling(g)?;
    let ss = steady_populations_4l(p)?;
    let ups = Dephasing4::new(p)?;
    let prefactor = 2.0 * g * g / ups.ups_ab;
    Ok(RateReport {
        a_plus: prefactor * ss.pops[1],
        a_minus: prefactor * ss.pops[0],
        pops: ss.pops,
        coherence: ss.coherence,
        ups_ab: ups.ups_ab,
        n_ss_predicted: None,
    })
}

/// Photon-number floor reached when the atom sits in `b` and cools at `2g²/Υ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoolingLimit {
    /// `κ n̄ / (2g²/Υ + κ)`.
    pub exact: f64,
    /// `n̄ / (2g²/κΥ)`, valid when `2g²/Υ ≫ κ`.
    pub approx: f64,
}

pub fn cooling_limit(g: f64, kappa: f64, ups: f64, nbar: f64) -> Result<CoolingLimit> {
    check_coupling(g)?;
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(invalid("kappa", format!("must be finite and >= 0, got {kappa}")));
    }
    if !(ups > 0.0) || !ups.is_finite() {
        return Err(invalid("ups", format!("must be positive and finite, got {ups}")));
    }
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(invalid("nbar", format!("must be finite and >= 0, got {nbar}")));
    }
    let cool = 2.0 * g * g / ups;
    Ok(CoolingLimit { exact: kappa * nbar / (cool + kappa), approx: nbar * kappa / cool })
}

/// Drive strength `2√(Υ_eb Υ_ab)` above which the three-level machine stops cooling efficiently.
pub fn working_region_bound(ups_eb: f64, ups_ab: f64) -> Result<f64> {
    if !(ups_eb > 0.0) || !(ups_ab > 0.0) {
        return Err(invalid("ups", format!("dephasing rates must be positive, got {ups_eb}, {ups_ab}")));
    }
    Ok(2.0 * (ups_eb * ups_ab).sqrt())
}

/// `√N g`, the coupling of `N` atoms acting in phase.
pub fn collective_coupling(g: f64, n_atoms: u64) -> Result<f64> {
    if n_atoms == 0 {
        return Err(invalid("n_atoms", "must be at least 1"));
    }
    Ok(g * (n_atoms as f64).sqrt())
}

/// Temperature in kelvin whose Planck occupation at `omega` (MHz) equals `n`.
pub fn effective_temperature(omega: f64, n: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(invalid("omega", format!("must be positive and finite, got {omega}")));
    }
    if !(n > 0.0) || !n.is_finite() {
        return Err(invalid("n", format!("occupation must be positive and finite, got {n}")));
    }
    Ok(units::mhz_to_kelvin(omega) / (1.0 / n).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::planck_occupation;

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

    #[test]
    fn closed_form_state_matches_numeric() {
        use crate::atom::{build_atom_liouvillian_3l, build_atom_liouvillian_4l, four, three};
        use crate::operator::steady_state;
        for &drive in &[0.3, 2.0] {
            let p = desk_3l(drive);
            let rho = steady_state(&build_atom_liouvillian_3l(&p).unwrap()).unwrap();
            let closed = steady_populations_3l(&p).unwrap().density_matrix(three::E, three::A);
            assert!(rho.max_abs_diff(&closed) < 1e-12, "{}", rho.max_abs_diff(&closed));
            let q = desk_4l(drive);
            let rho = steady_state(&build_atom_liouvillian_4l(&q).unwrap()).unwrap();
            let closed = steady_populations_4l(&q).unwrap().density_matrix(four::E, four::M);
            assert!(rho.max_abs_diff(&closed) < 1e-12, "{}", rho.max_abs_diff(&closed));
        }
    }

    #[test]
    fn dephasing_matches_hand_sums() {
        let p = desk_3l(0.0);
        let n = |gap: f64| 1.0 / ((gap / p.temperature).exp() - 1.0);
        let (nea, neb) = (n(3.0), n(4.0));
        let d = Dephasing3::new(&p).unwrap();
        let ab = 0.5 * (1.0 * nea + 0.7 * neb + 0.05 + 0.03);
        let eb = 0.5 * (1.0 * (nea + 1.0) + 0.7 * (neb + 1.0) + 0.7 * neb + 0.02 + 0.03);
        let ea = 0.5 * (1.0 * nea + 1.0 * (nea + 1.0) + 0.7 * (neb + 1.0) + 0.02 + 0.05);
        assert!((d.ups_ab - ab).abs() < 1e-14);
        assert!((d.ups_eb - eb).abs() < 1e-14);
        assert!((d.ups_ea - ea).abs() < 1e-14);
    }

    #[test]
    fn three_level_ratios_against_direct_formula() {
        // direct e^{+x} form is safe at these small gaps
        let p = desk_3l(1.7);
        let ss = steady_populations_3l(&p).unwrap();
        let ea = p.bath_ea().unwrap();
        let eb = p.bath_eb().unwrap();
        let ups = Dephasing3::new(&p).unwrap();
        let w = p.drive * p.drive / (2.0 * ups.ups_ea);
        let want = (eb.gamma_plus / eb.gamma_minus) * (ea.gamma_minus + w) / (ea.gamma_plus + w);
        assert!((ss.pops[1] / ss.pops[0] / want - 1.0).abs() < 1e-13);
        assert!((ss.pops[2] / ss.pops[0] / (-4.0f64 / 1.5).exp() - 1.0).abs() < 1e-13);
        assert!((ss.pops.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn four_level_ratios_against_direct_formula() {
        let p = desk_4l(0.9);
        let ss = steady_populations_4l(&p).unwrap();
        let em = p.bath_em().unwrap();
        let ups = Dephasing4::new(&p).unwrap();
        let w = p.drive * p.drive / (2.0 * ups.ups_em);
        let (b, a, m, e) = (ss.pops[0], ss.pops[1], ss.pops[2], ss.pops[3]);
        assert!((e / m / ((em.gamma_plus + w) / (em.gamma_minus + w)) - 1.0).abs() < 1e-13);
        assert!((m / a / (-1.5f64 / 1.2).exp() - 1.0).abs() < 1e-13);
        assert!((e / b / (-4.5f64 / 1.2).exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn undriven_rates_keep_boltzmann_ratio() {
        let r3 = rates_3l(&desk_3l(0.0), 0.1).unwrap();
        assert!((r3.a_minus / r3.a_plus / (1.0f64 / 1.5).exp() - 1.0).abs() < 1e-13);
        let r4 = rates_4l(&desk_4l(0.0), 0.1).unwrap();
        assert!((r4.a_minus / r4.a_plus / (1.0f64 / 1.2).exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn strong_drive_limits() {
        let r3 = rates_3l(&desk_3l(1e6), 0.1).unwrap();
        assert!(r3.a_plus < 1e-9 && r3.a_minus < 1e-9);
        let p4 = desk_4l(1e6);
        let r4 = rates_4l(&p4, 0.1).unwrap();
        let ups = Dephasing4::new(&p4).unwrap();
        // fully driven: N_e = N_m, so the atom keeps a finite a-population;
        // A₋' saturates at 2g²N_b/Υ'_ab
        assert!((r4.pops[3] / r4.pops[2] - 1.0).abs() < 1e-6);
        assert!(r4.a_minus <= 2.0 * 0.01 / ups.ups_ab);
    }

    #[test]
    fn cooling_limit_numbers() {
        let lim = cooling_limit(1.5, 0.1, 0.5, 6200.0).unwrap();
        assert!((lim.approx - 6200.0 / 90.0).abs() < 1e-12);
        assert!((lim.exact - 6200.0 / 91.0).abs() < 1e-12);
        assert_eq!(cooling_limit(1.5, 0.0, 0.5, 6200.0).unwrap().exact, 0.0);
    }

    #[test]
    fn working_region_examples() {
        assert_eq!(working_region_bound(1.0, 1.0).unwrap(), 2.0);
        assert_eq!(working_region_bound(4.0, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn collective_examples() {
        assert_eq!(collective_coupling(0.3, 1).unwrap(), 0.3);
        assert_eq!(collective_coupling(0.3, 4).unwrap(), 0.6);
        assert!(collective_coupling(0.3, 0).is_err());
    }

    #[test]
    fn effective_temperature_inverts_planck() {
        let t_mhz = crate::units::kelvin_to_mhz(4.2);
        let n = planck_occupation(1000.0, t_mhz).unwrap();
        assert!((effective_temperature(1000.0, n).unwrap() - 4.2).abs() < 1e-10);
        assert!(effective_temperature(1000.0, 1e-300).unwrap() < 1e-3);
        assert!(effective_temperature(1000.0, 0.0).is_err());
    }
}
