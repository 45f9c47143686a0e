//! Atom ⊗ truncated-Fock master equation, used to check the eliminated
//! resonator dynamics at small thermal occupation.
//!
//! Basis ordering is `|α, n⟩ ↦ α·F + n` with `F = fock_dim`.

use faer::c64;
use serde::Serialize;

use crate::atom::{atom_terms_3l, atom_terms_4l, sigma_minus, AtomTerms, FourLevelParams, ThreeLevelParams};
use crate::error::{invalid, Error, Result};
use crate::operator::{check_dim, kron, steady_state_with, Operator, SteadyStateOptions, Superoperator};

/// Probability allowed in the top Fock level of the composite steady state.
pub const FOCK_TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AtomModel {
    Three(ThreeLevelParams),
    Four(FourLevelParams),
}

impl AtomModel {
    fn terms(&self) -> Result<AtomTerms> {
        match self {
            AtomModel::Three(p) => atom_terms_3l(p),
            AtomModel::Four(p) => atom_terms_4l(p),
        }
    }

    pub fn levels(&self) -> usize {
        match self {
            AtomModel::Three(_) => 3,
            AtomModel::Four(_) => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompositeSpec {
    pub atom: AtomModel,
    pub kappa: f64,
    pub nbar_r: f64,
    pub g: f64,
    pub fock_dim: usize,
}

impl CompositeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.fock_dim < 2 {
            return Err(invalid("fock_dim", format!("must be at least 2, got {}", self.fock_dim)));
        }
        check_dim(self.atom.levels() * self.fock_dim)?;
        for (name, v) in [("kappa", self.kappa), ("nbar_r", self.nbar_r), ("g", self.g)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.atom.levels() * self.fock_dim
    }
}

/// Truncated annihilation operator on `fock_dim` levels.
pub fn annihilation(fock_dim: usize) -> Operator {
    Operator::from_fn(fock_dim, |i, j| if j == i + 1 { c64::new((j as f64).sqrt(), 0.0) } else { c64::new(0.0, 0.0) })
}

/// `I_atom ⊗ â`.
pub fn resonator_lowering(spec: &CompositeSpec) -> Result<Operator> {
    kron(&Operator::identity(spec.atom.levels()), &annihilation(spec.fock_dim))
}

/// `I_atom ⊗ â†â`.
pub fn photon_number(spec: &CompositeSpec) -> Result<Operator> {
    let a = annihilation(spec.fock_dim);
    kron(&Operator::identity(spec.atom.levels()), &(&a.adjoint() * &a))
}

/// Atom Liouvillian ⊗ identity, resonator damping at `κ(n̄+1)` and `κn̄`, and the
/// exchange Hamiltonian `g(σ⁺â + σ⁻â†)`.
pub fn build_composite_liouvillian(spec: &CompositeSpec) -> Result<Superoperator> {
    spec.validate()?;
    let terms = spec.atom.terms()?;
    let levels = spec.atom.levels();
    let f = spec.fock_dim;
    let id_a = Operator::identity(levels);
    let id_f = Operator::identity(f);
    let a = annihilation(f);
    let sm = sigma_minus(levels);

    let coupling = {
        let x = kron(&sm.adjoint(), &a)?;
        let y = kron(&sm, &a.adjoint())?;
        (&x + &y).scaled(c64::new(spec.g, 0.0))
    };
    let h = &kron(&terms.hamiltonian, &id_f)? + &coupling;
    let mut s = Superoperator::hamiltonian(&h)?;
    for (l, rate) in &terms.jumps {
        s.add_dissipator(&kron(l, &id_f)?, *rate)?;
    }
    s.add_dissipator(&kron(&id_a, &a)?, spec.kappa * (spec.nbar_r + 1.0))?;
    s.add_dissipator(&kron(&id_a, &a.adjoint())?, spec.kappa * spec.nbar_r)?;
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositeSteady {
    /// `⟨â†â⟩`.
    pub mean_photon: f64,
    /// Photon-number distribution traced over the atom.
    pub photon_probs: Vec<f64>,
    /// Atom populations traced over the resonator.
    pub atom_pops: Vec<f64>,
}

impl CompositeSteady {
    pub fn tail_mass(&self) -> f64 {
        *self.photon_probs.last().unwrap_or(&0.0)
    }
}

/// Steady state of the composite system, reduced to photon and atom marginals.
///
/// Fails with [`Error::Truncation`] when the top Fock level holds more than
/// [`FOCK_TAIL_TOLERANCE`].
pub fn composite_steady_state(spec: &CompositeSpec) -> Result<CompositeSteady> {
    let l = build_composite_liouvillian(spec)?;
    // desk-scale populations do not span enough decades to need balancing
    let opts = SteadyStateOptions { balance_rounds: 0, ..Default::default() };
    let rho = steady_state_with(&l, opts)?;
    drop(l);
    let levels = spec.atom.levels();
    let f = spec.fock_dim;
    let diag = rho.real_diagonal();
    let photon_probs: Vec<f64> = (0..f).map(|n| (0..levels).map(|al| diag[al * f + n]).sum()).collect();
    let atom_pops: Vec<f64> = (0..levels).map(|al| (0..f).map(|n| diag[al * f + n]).sum()).collect();
    let mean_photon = photon_probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let out = CompositeSteady { mean_photon, photon_probs, atom_pops };
    let tail = out.tail_mass();
    if tail > FOCK_TAIL_TOLERANCE {
        return Err(Error::Truncation { tail_mass: tail, fock_dim: f, suggested: suggest_fock_dim(out.mean_photon, f) });
    }
    Ok(out)
}

/// `⟨â†â⟩` in the composite steady state.
pub fn composite_steady_photon(spec: &CompositeSpec) -> Result<f64> {
    Ok(composite_steady_state(spec)?.mean_photon)
}

/// Fock dimension whose thermal tail at mean `n` stays below [`FOCK_TAIL_TOLERANCE`].
pub fn suggest_fock_dim(n: f64, current: usize) -> usize {
    let n = n.max(1e-6);
    let ratio = n / (n + 1.0);
    let needed = (FOCK_TAIL_TOLERANCE.ln() / ratio.ln()).ceil() as usize + 2;
    needed.max(current + 1)
}
