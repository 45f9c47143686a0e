//! Photon-number dynamics of the resonator once the atom is eliminated.
//!
//! Only the diagonal `p_n` is tracked. Photons are added at `Γ₊(n + 1)` and
//! removed at `Γ₋ n`, with `Γ₊ = A₊ + κ n̄_R` and `Γ₋ = A₋ + κ(n̄_R + 1)`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Steady-state tail mass the adaptive truncation aims for.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Upper bound on uniformization terms in [`BirthDeathChain::evolve`].
pub const MAX_UNIFORMIZATION_TERMS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResonatorParams {
    pub kappa: f64,
    pub nbar_r: f64,
    pub a_plus: f64,
    pub a_minus: f64,
}

impl ResonatorParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa", self.kappa), ("nbar_r", self.nbar_r), ("a_plus", self.a_plus), ("a_minus", self.a_minus)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `Γ₊ = A₊ + κ n̄_R`.
    pub fn up_rate(&self) -> f64 {
        self.a_plus + self.kappa * self.nbar_r
    }

    /// `Γ₋ = A₋ + κ (n̄_R + 1)`.
    pub fn down_rate(&self) -> f64 {
        self.a_minus + self.kappa * (self.nbar_r + 1.0)
    }

    /// Net damping `Γ₋ − Γ₊ = A₋ − A₊ + κ`.
    pub fn net_damping(&self) -> f64 {
        self.a_minus - self.a_plus + self.kappa
    }

    /// `⟨n⟩_ss = (A₊ + κ n̄_R) / (A₋ − A₊ + κ)`.
    pub fn steady_photon_number(&self) -> Result<f64> {
        self.validate()?;
        let den = self.net_damping();
        if !(den > 0.0) {
            return Err(Error::NoSteadyState { denominator: den });
        }
        Ok(self.up_rate() / den)
    }

    /// `⟨n⟩(t)` relaxing exponentially from `n0` towards the steady value.
    pub fn transient_mean_photon(&self, n0: f64, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid("t", format!("must be >= 0, got {t}")));
        }
        let n_ss = self.steady_photon_number()?;
        Ok(n_ss + (n0 - n_ss) * (-self.net_damping() * t).exp())
    }
}

/// Photon-number distribution `p_n`, `n = 0..=n_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhotonDistribution {
    pub probs: Vec<f64>,
}

impl PhotonDistribution {
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability in the top level, a proxy for truncation error.
    pub fn tail_mass(&self) -> f64 {
        *self.probs.last().unwrap_or(&0.0)
    }

    /// Point mass on `n`.
    pub fn fock(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(invalid("n", format!("{n} exceeds n_max = {n_max}")));
        }
        let mut probs = vec![0.0; n_max + 1];
        probs[n] = 1.0;
        Ok(Self { probs })
    }
}

/// Truncated birth–death generator acting on `p_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BirthDeathChain {
    pub up: f64,
    pub down: f64,
    pub n_max: usize,
}

/// Generator of the photon-number chain for `rp`, truncated at `n_max`.
pub fn birth_death_generator(rp: &ResonatorParams, n_max: usize) -> Result<BirthDeathChain> {
    rp.validate()?;
    if n_max == 0 {
        return Err(invalid("n_max", "must be at least 1"));
    }
    Ok(BirthDeathChain { up: rp.up_rate(), down: rp.down_rate(), n_max })
}

impl BirthDeathChain {
    /// Rate out of level `n` upwards.
    pub fn up_rate(&self, n: usize) -> f64 {
        if n >= self.n_max {
            0.0
        } else {
            self.up * (n as f64 + 1.0)
        }
    }

    /// Rate out of level `n` downwards.
    pub fn down_rate(&self, n: usize) -> f64 {
        self.down * n as f64
    }

    /// `dp/dt` for the truncated chain (reflecting at `n_max`).
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let n_max = self.n_max;
        (0..=n_max)
            .map(|n| {
                let mut d = -(self.up_rate(n) + self.down_rate(n)) * p[n];
                if n > 0 {
                    d += self.up_rate(n - 1) * p[n - 1];
                }
                if n < n_max {
                    d += self.down_rate(n + 1) * p[n + 1];
                }
                d
            })
            .collect()
    }

    /// Stationary distribution of the truncated chain from detailed balance.
    ///
    /// Fails with [`Error::Truncation`] when the top level holds more than
    /// [`TAIL_TOLERANCE`] of the probability.
    pub fn steady_state(&self) -> Result<PhotonDistribution> {
        let dist = self.steady_state_unchecked();
        let tail = dist.tail_mass();
        if tail > TAIL_TOLERANCE {
            return Err(Error::Truncation { tail_mass: tail, fock_dim: self.n_max + 1, suggested: 2 * (self.n_max + 1) });
        }
        Ok(dist)
    }

    fn steady_state_unchecked(&self) -> PhotonDistribution {
        if self.down == 0.0 && self.up > 0.0 {
            let mut probs = vec![0.0; self.n_max + 1];
            probs[self.n_max] = 1.0;
            return PhotonDistribution { probs };
        }
        // log-weights keep long chains with ratio close to 1 finite
        let mut log_w = Vec::with_capacity(self.n_max + 1);
        log_w.push(0.0_f64);
        for n in 0..self.n_max {
            let r = self.up_rate(n) / self.down_rate(n + 1);
            log_w.push(log_w[n] + r.ln());
        }
        let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = w.iter().sum();
        PhotonDistribution { probs: w.iter().map(|x| x / z).collect() }
    }

    /// `exp(t G) p0` by uniformization.
    pub fn evolve(&self, p0: &PhotonDistribution, t: f64) -> Result<PhotonDistribution> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
        }
        if p0.probs.len() != self.n_max + 1 {
            return Err(Error::DimensionMismatch { expected: self.n_max + 1, found: p0.probs.len() });
        }
        let lambda = (0..=self.n_max).map(|n| self.up_rate(n) + self.down_rate(n)).fold(0.0, f64::max);
        let lt = lambda * t;
        if lt == 0.0 {
            return Ok(p0.clone());
        }
        let terms = (lt + 10.0 * lt.sqrt() + 40.0).ceil() as usize;
        if terms > MAX_UNIFORMIZATION_TERMS {
            return Err(Error::TooStiff { terms, limit: MAX_UNIFORMIZATION_TERMS });
        }
        // P = I + G/λ is stochastic; Poisson(λt) weights are built by ratios
        // from the mode and renormalized over the retained window
        let mode = lt.floor() as usize;
        let mut weights = vec![0.0; terms + 1];
        weights[mode.min(terms)] = 1.0;
        for k in (mode + 1)..=terms {
            weights[k] = weights[k - 1] * lt / k as f64;
        }
        for k in (0..mode.min(terms)).rev() {
            weights[k] = weights[k + 1] * (k + 1) as f64 / lt;
        }
        let total: f64 = weights.iter().sum();
        let mut v = p0.probs.clone();
        let mut out = vec![0.0; v.len()];
        for w in &weights {
            let weight = w / total;
            for (o, x) in out.iter_mut().zip(&v) {
                *o += weight * x;
            }
            let gv = self.apply(&v);
            for (x, d) in v.iter_mut().zip(gv) {
                *x += d / lambda;
            }
        }
        Ok(PhotonDistribution { probs: out })
    }
}

/// Stationary photon distribution with `n_max` grown until the tail is negligible.
pub fn adaptive_steady_distribution(rp: &ResonatorParams) -> Result<PhotonDistribution> {
    let n_est = rp.steady_photon_number()?;
    let mut n_max = (4.0 * (n_est + 1.0)).ceil() as usize;
    loop {
        let chain = birth_death_generator(rp, n_max)?;
        match chain.steady_state() {
            Ok(d) => return Ok(d),
            Err(Error::Truncation { .. }) if n_max < 1 << 26 => n_max *= 2,
            Err(e) => return Err(e),
        }
    }
}
