//! Atom-only Liouvillians for the three- and four-level refrigerators.
//!
//! Level indices: three-level `b = 0, a = 1, e = 2`; four-level
//! `b = 0, a = 1, m = 2, e = 3`. The microwave transition is always `a ↔ b`
//! and `σ⁻ = |b⟩⟨a|`. All frequencies, rates, and the temperature `k_B T / h`
//! share one unit (MHz throughout the crate).

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operator::{Operator, Superoperator};

/// Above this `gap / T` the Planck occupation is reported as exactly zero.
pub const EXPONENT_GUARD: f64 = 700.0;

/// Relative tolerance of the ladder-closure checks.
pub const LADDER_TOLERANCE: f64 = 1e-12;

pub mod three {
    pub const B: usize = 0;
    pub const A: usize = 1;
    pub const E: usize = 2;
}

pub mod four {
    pub const B: usize = 0;
    pub const A: usize = 1;
    pub const M: usize = 2;
    pub const E: usize = 3;
}

/// Thermal occupation `1 / (e^{gap/T} − 1)`.
pub fn planck_occupation(gap: f64, temperature: f64) -> Result<f64> {
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(invalid("gap", format!("must be positive and finite, got {gap}")));
    }
    check_temperature(temperature)?;
    let x = gap / temperature;
    Ok(if x > EXPONENT_GUARD {
        0.0
    } else if x < 1.0 {
        1.0 / x.exp_m1()
    } else {
        // e^{-x} / (1 - e^{-x}) never forms e^{x}
        (-x).exp() / -(-x).exp_m1()
    })
}

/// `e^{−gap/T}`, the Boltzmann factor of a gap.
pub fn boltzmann_factor(gap: f64, temperature: f64) -> f64 {
    (-gap / temperature).exp()
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(invalid("temperature", format!("must be positive and finite, got {temperature}")));
    }
    Ok(())
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(invalid(name, format!("must be finite and >= 0, got {value}")));
    }
    Ok(())
}

fn check_gap(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(invalid(name, format!("must be positive and finite, got {value}")));
    }
    Ok(())
}

fn check_ladder(total: f64, parts: &[f64], what: &str) -> Result<()> {
    let sum: f64 = parts.iter().sum();
    if (total - sum).abs() > LADDER_TOLERANCE * total.abs().max(sum.abs()) {
        return Err(invalid("omega_eb", format!("ladder does not close: omega_eb = {total} but {what} = {sum}")));
    }
    Ok(())
}

/// Thermal excitation and decay rates of one transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathRates {
    /// Excitation rate `Γ⁺ = γ n̄`.
    pub gamma_plus: f64,
    /// Decay rate `Γ⁻ = γ (n̄ + 1)`.
    pub gamma_minus: f64,
    pub nbar: f64,
}

impl BathRates {
    pub fn new(gamma: f64, gap: f64, temperature: f64) -> Result<Self> {
        check_rate("gamma", gamma)?;
        let nbar = planck_occupation(gap, temperature)?;
        Ok(Self { gamma_plus: gamma * nbar, gamma_minus: gamma * (nbar + 1.0), nbar })
    }
}

/// Three-level refrigerator: drive on `e ↔ a`, microwave on `a ↔ b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelParams {
    /// Microwave gap `Ω_ab`, equal to the resonator frequency.
    pub omega_r: f64,
    pub omega_ea: f64,
    pub omega_eb: f64,
    pub gamma_ea: f64,
    pub gamma_eb: f64,
    pub gp_a: f64,
    pub gp_b: f64,
    pub gp_e: f64,
    /// `k_B T / h`.
    pub temperature: f64,
    /// Rabi frequency of the drive.
    pub drive: f64,
}

impl ThreeLevelParams {
    pub fn validate(&self) -> Result<()> {
        check_gap("omega_r", self.omega_r)?;
        check_gap("omega_ea", self.omega_ea)?;
        check_gap("omega_eb", self.omega_eb)?;
        check_ladder(self.omega_eb, &[self.omega_ea, self.omega_r], "omega_ea + omega_r")?;
        check_rate("gamma_ea", self.gamma_ea)?;
        check_rate("gamma_eb", self.gamma_eb)?;
        check_rate("gp_a", self.gp_a)?;
        check_rate("gp_b", self.gp_b)?;
        check_rate("gp_e", self.gp_e)?;
        check_rate("drive", self.drive)?;
        check_temperature(self.temperature)
    }

    pub fn bath_ea(&self) -> Result<BathRates> {
        BathRates::new(self.gamma_ea, self.omega_ea, self.temperature)
    }

    pub fn bath_eb(&self) -> Result<BathRates> {
        BathRates::new(self.gamma_eb, self.omega_eb, self.temperature)
    }

    pub fn with_drive(mut self, drive: f64) -> Self {
        self.drive = drive;
        self
    }

    /// Choose `gp_a = gp_b` so that the microwave coherence decays at `ups_ab`.
    pub fn with_target_ups_ab(mut self, ups_ab: f64) -> Result<Self> {
        let thermal = 0.5 * (self.bath_ea()?.gamma_plus + self.bath_eb()?.gamma_plus);
        let each = ups_ab - thermal;
        if !(each >= 0.0) {
            return Err(invalid("ups_ab", format!("target {ups_ab} is below the thermal contribution {thermal}")));
        }
        self.gp_a = each;
        self.gp_b = each;
        Ok(self)
    }
}

/// Four-level refrigerator: drive on `e ↔ m`, relay `m ↔ a`, microwave on `a ↔ b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourLevelParams {
    pub omega_r: f64,
    pub omega_em: f64,
    pub omega_ma: f64,
    pub omega_eb: f64,
    pub gamma_em: f64,
    pub gamma_ma: f64,
    pub gamma_eb: f64,
    pub gp_a: f64,
    pub gp_b: f64,
    pub gp_m: f64,
    pub gp_e: f64,
    pub temperature: f64,
    pub drive: f64,
}

impl FourLevelParams {
    pub fn validate(&self) -> Result<()> {
        check_gap("omega_r", self.omega_r)?;
        check_gap("omega_em", self.omega_em)?;
        check_gap("omega_ma", self.omega_ma)?;
        check_gap("omega_eb", self.omega_eb)?;
        check_ladder(self.omega_eb, &[self.omega_em, self.omega_ma, self.omega_r], "omega_em + omega_ma + omega_r")?;
        check_rate("gamma_em", self.gamma_em)?;
        check_rate("gamma_ma", self.gamma_ma)?;
        check_rate("gamma_eb", self.gamma_eb)?;
        check_rate("gp_a", self.gp_a)?;
        check_rate("gp_b", self.gp_b)?;
        check_rate("gp_m", self.gp_m)?;
        check_rate("gp_e", self.gp_e)?;
        check_rate("drive", self.drive)?;
        check_temperature(self.temperature)
    }

    pub fn bath_em(&self) -> Result<BathRates> {
        BathRates::new(self.gamma_em, self.omega_em, self.temperature)
    }

    pub fn bath_ma(&self) -> Result<BathRates> {
        BathRates::new(self.gamma_ma, self.omega_ma, self.temperature)
    }

    pub fn bath_eb(&self) -> Result<BathRates> {
        BathRates::new(self.gamma_eb, self.omega_eb, self.temperature)
    }

    pub fn with_drive(mut self, drive: f64) -> Self {
        self.drive = drive;
        self
    }

    /// Choose `gp_a = gp_b` so that the microwave coherence decays at `ups_ab`.
    pub fn with_target_ups_ab(mut self, ups_ab: f64) -> Result<Self> {
        let thermal = 0.5 * (self.bath_eb()?.gamma_plus + self.bath_ma()?.gamma_plus);
        let each = ups_ab - thermal;
        if !(each >= 0.0) {
            return Err(invalid("ups_ab", format!("target {ups_ab} is below the thermal contribution {thermal}")));
        }
        self.gp_a = each;
        self.gp_b = each;
        Ok(self)
    }
}

/// `|upper⟩⟨lower|`.
pub fn transition(dim: usize, upper: usize, lower: usize) -> Operator {
    Operator::ket_bra(dim, upper, lower)
}

/// Microwave lowering operator `σ⁻ = |b⟩⟨a|` for a `dim`-level atom.
pub fn sigma_minus(dim: usize) -> Operator {
    Operator::ket_bra(dim, three::B, three::A)
}

/// Resonant drive `½Ω(|hi⟩⟨lo| + |lo⟩⟨hi|)`.
fn drive_hamiltonian(dim: usize, hi: usize, lo: usize, rabi: f64) -> Operator {
    let mut h = Operator::zeros(dim);
    h.set(hi, lo, c64::new(0.5 * rabi, 0.0));
    h.set(lo, hi, c64::new(0.5 * rabi, 0.0));
    h
}

/// Hamiltonian and weighted jump operators of an atom model.
#[derive(Clone, Debug)]
pub struct AtomTerms {
    pub hamiltonian: Operator,
    /// `(L, rate)` pairs; zero rates are kept so the list has a fixed layout.
    pub jumps: Vec<(Operator, f64)>,
}

impl AtomTerms {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn liouvillian(&self) -> Result<Superoperator> {
        let mut s = Superoperator::hamiltonian(&self.hamiltonian)?;
        for (l, rate) in &self.jumps {
            s.add_dissipator(l, *rate)?;
        }
        Ok(s)
    }

    fn thermal(&mut self, upper: usize, lower: usize, bath: BathRates) {
        let d = self.dim();
        self.jumps.push((transition(d, lower, upper), bath.gamma_minus));
        self.jumps.push((transition(d, upper, lower), bath.gamma_plus));
    }

    fn dephasing(&mut self, level: usize, rate: f64) {
        let d = self.dim();
        self.jumps.push((Operator::ket_bra(d, level, level), rate));
    }
}

/// Terms of the three-level atom: drive on `e ↔ a`, baths on `e ↔ a` and
/// `e ↔ b` (no direct `a ↔ b` decay), dephasing on every level.
pub fn atom_terms_3l(p: &ThreeLevelParams) -> Result<AtomTerms> {
    use three::*;
    p.validate()?;
    let mut t = AtomTerms { hamiltonian: drive_hamiltonian(3, E, A, p.drive), jumps: Vec::new() };
    t.thermal(E, A, p.bath_ea()?);
    t.thermal(E, B, p.bath_eb()?);
    t.dephasing(A, p.gp_a);
    t.dephasing(B, p.gp_b);
    t.dephasing(E, p.gp_e);
    Ok(t)
}

/// Terms of the four-level atom: drive on `e ↔ m`, baths on `e ↔ b`, `e ↔ m`
/// and `m ↔ a`, dephasing on every level.
pub fn atom_terms_4l(p: &FourLevelParams) -> Result<AtomTerms> {
    use four::*;
    p.validate()?;
    let mut t = AtomTerms { hamiltonian: drive_hamiltonian(4, E, M, p.drive), jumps: Vec::new() };
    t.thermal(E, B, p.bath_eb()?);
    t.thermal(E, M, p.bath_em()?);
    t.thermal(M, A, p.bath_ma()?);
    t.dephasing(A, p.gp_a);
    t.dephasing(B, p.gp_b);
    t.dephasing(M, p.gp_m);
    t.dephasing(E, p.gp_e);
    Ok(t)
}

/// Interaction-picture Liouvillian of the three-level atom.
pub fn build_atom_liouvillian_3l(p: &ThreeLevelParams) -> Result<Superoperator> {
    atom_terms_3l(p)?.liouvillian()
}

/// Interaction-picture Liouvillian of the four-level atom.
pub fn build_atom_liouvillian_4l(p: &FourLevelParams) -> Result<Superoperator> {
    atom_terms_4l(p)?.liouvillian()
}
