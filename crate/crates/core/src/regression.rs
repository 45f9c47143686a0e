//! Quantum-regression integrals for the heating and cooling rates.
//!
//! Two independent routes are provided: the reduced linear systems that close
//! on `⟨σ±⟩` and one drive coherence, and the full-Liouvillian resolvent which
//! makes no reduction at all.

use faer::c64;
use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::atom::{sigma_minus, FourLevelParams, ThreeLevelParams};
use crate::error::{invalid, Error, Result};
use crate::operator::{correlation_integral, steady_state, Operator, Superoperator};
use crate::rates::{steady_populations_3l, steady_populations_4l, Dephasing3, Dephasing4};

/// Which rate a regression system computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateKind {
    Heating,
    Cooling,
}

/// `dV/dt = G V` with initial value `V₀`; `∫₀^∞ V dt = −G⁻¹ V₀`.
#[derive(Clone, Debug)]
pub struct RegressionSystem {
    pub g_matrix: Mat<c64>,
    pub v0: Vec<c64>,
}

impl RegressionSystem {
    pub fn new(g_matrix: Mat<c64>, v0: Vec<c64>) -> Result<Self> {
        if g_matrix.nrows() != g_matrix.ncols() || g_matrix.nrows() != v0.len() {
            return Err(Error::DimensionMismatch { expected: g_matrix.nrows(), found: v0.len() });
        }
        Ok(Self { g_matrix, v0 })
    }

    pub fn dim(&self) -> usize {
        self.v0.len()
    }

    pub fn eigenvalues(&self) -> Result<Vec<c64>> {
        self.g_matrix.eigenvalues().map_err(|_| Error::NonConvergence { residual: f64::NAN })
    }

    /// Largest eigenvalue real part; negative for a decaying system.
    pub fn spectral_abscissa(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn check_stable(&self) -> Result<()> {
        let real_part = self.spectral_abscissa()?;
        if !(real_part < 0.0) {
            return Err(Error::Unstable { real_part });
        }
        Ok(())
    }
}

/// `−G⁻¹ V₀`.
pub fn regression_integral(rs: &RegressionSystem) -> Result<Vec<c64>> {
    rs.check_stable()?;
    let n = rs.dim();
    let lu = rs.g_matrix.partial_piv_lu();
    let rhs = Mat::<c64>::from_fn(n, 1, |i, _| -rs.v0[i]);
    let x = lu.solve(&rhs);
    let out: Vec<c64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(out)
}

/// Two-variable system for `(⟨σ^∓(t)σ^±⟩, ⟨τ^∓_{eb}(t)σ^±⟩)` of the three-level atom.
pub fn build_regression_3l(p: &ThreeLevelParams, which: RateKind) -> Result<RegressionSystem> {
    let ups = Dephasing3::new(p)?;
    let ss = steady_populations_3l(p)?;
    let (off, v0) = match which {
        RateKind::Heating => (c64::new(0.0, 0.5 * p.drive), vec![c64::new(ss.pops[1], 0.0), ss.coherence.conj()]),
        RateKind::Cooling => (c64::new(0.0, -0.5 * p.drive), vec![c64::new(ss.pops[0], 0.0), c64::new(0.0, 0.0)]),
    };
    let g = Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c64::new(-ups.ups_ab, 0.0),
        (1, 1) => c64::new(-ups.ups_eb, 0.0),
        _ => off,
    });
    RegressionSystem::new(g, v0)
}

/// The four-level correlation decouples into a single exponential at `Υ'_ab`.
pub fn build_regression_4l(p: &FourLevelParams, which: RateKind) -> Result<RegressionSystem> {
    let ups = Dephasing4::new(p)?;
    let ss = steady_populations_4l(p)?;
    let pop = match which {
        RateKind::Heating => ss.pops[1],
        RateKind::Cooling => ss.pops[0],
    };
    RegressionSystem::new(Mat::from_fn(1, 1, |_, _| c64::new(-ups.ups_ab, 0.0)), vec![c64::new(pop, 0.0)])
}

/// `(A₊, A₋)` from the reduced systems: `2g² Re` of the first integral component.
pub fn reduced_rates_3l(p: &ThreeLevelParams, g: f64) -> Result<(f64, f64)> {
    let heat = regression_integral(&build_regression_3l(p, RateKind::Heating)?)?;
    let cool = regression_integral(&build_regression_3l(p, RateKind::Cooling)?)?;
    Ok((2.0 * g * g * heat[0].re, 2.0 * g * g * cool[0].re))
}

pub fn reduced_rates_4l(p: &FourLevelParams, g: f64) -> Result<(f64, f64)> {
    let heat = regression_integral(&build_regression_4l(p, RateKind::Heating)?)?;
    let cool = regression_integral(&build_regression_4l(p, RateKind::Cooling)?)?;
    Ok((2.0 * g * g * heat[0].re, 2.0 * g * g * cool[0].re))
}

/// `(A₊, A₋) = 2g² Re ∫ (⟨σ⁺(s)σ⁻⟩, ⟨σ⁻(s)σ⁺⟩) ds` on the full atom Liouvillian.
pub fn numeric_rates_full(liouvillian: &Superoperator, sigma_minus: &Operator, g: f64) -> Result<(f64, f64)> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(invalid("g", format!("coupling must be positive and finite, got {g}")));
    }
    let rho = steady_state(liouvillian)?;
    numeric_rates_with_state(liouvillian, &rho, sigma_minus, g)
}

/// [`numeric_rates_full`] with a precomputed steady state.
pub fn numeric_rates_with_state(liouvillian: &Superoperator, rho_ss: &Operator, sigma_minus: &Operator, g: f64) -> Result<(f64, f64)> {
    let sigma_plus = sigma_minus.adjoint();
    let heat = correlation_integral(liouvillian, rho_ss, &sigma_plus, sigma_minus)?;
    let cool = correlation_integral(liouvillian, rho_ss, sigma_minus, &sigma_plus)?;
    Ok((2.0 * g * g * heat.re, 2.0 * g * g * cool.re))
}

/// `σ⁻` for the three-level atom.
pub fn sigma_minus_3l() -> Operator {
    sigma_minus(3)
}

/// `σ⁻` for the four-level atom.
pub fn sigma_minus_4l() -> Operator {
    sigma_minus(4)
}
