//! Dense complex operators and Liouvillian superoperators.
//!
//! Density matrices are vectorized by column stacking,
//! `vec(ρ)[i + j·d] = ρ[i, j]`, so that `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`. Every
//! superoperator in the crate uses this convention; in particular the
//! dissipator `D[ρ] = LρL† − ½{L†L, ρ}` is stored as
//! `L̄ ⊗ L − ½ I ⊗ L†L − ½ (L†L)ᵀ ⊗ I`.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat, MatRef};

use crate::error::{invalid, Error, Result};
use crate::linalg;

/// Hilbert-space dimension cap used when no override is configured.
pub const DEFAULT_DIM_CAP: usize = 256;

/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "QFRIDGE_MAX_DIM";

/// Current Hilbert-dimension cap (read once from the environment).
pub fn dim_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(DIM_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&v: &usize| v > 0).unwrap_or(DEFAULT_DIM_CAP)
    })
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    let cap = dim_cap();
    if dim > cap {
        return Err(Error::DimensionCap { requested: dim, cap });
    }
    Ok(())
}

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
const ONE: c64 = c64 { re: 1.0, im: 0.0 };

/// A square complex matrix acting on a Hilbert space.
#[derive(Clone, Debug)]
pub struct Operator {
    mat: Mat<c64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self { mat: Mat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: Mat::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self { mat: Mat::from_fn(dim, dim, f) }
    }

    pub fn from_matrix(mat: Mat<c64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        Ok(Self { mat })
    }

    /// Diagonal operator with real entries.
    pub fn diagonal(entries: &[f64]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { c64::new(entries[i], 0.0) } else { ZERO })
    }

    /// `|row⟩⟨col|` in a `dim`-dimensional space.
    pub fn ket_bra(dim: usize, row: usize, col: usize) -> Self {
        let mut op = Self::zeros(dim);
        op.mat[(row, col)] = ONE;
        op
    }

    /// Reassemble an operator from its column-stacked vectorization.
    pub fn from_vectorized(dim: usize, v: &[c64]) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: v.len() });
        }
        Ok(Self::from_fn(dim, |i, j| v[i + j * dim]))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.mat[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: c64) {
        self.mat[(row, col)] = value;
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn vectorize(&self) -> Vec<c64> {
        let d = self.dim();
        let mut v = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                v.push(self.mat[(i, j)]);
            }
        }
        v
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint().to_owned() }
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn scaled(&self, factor: c64) -> Self {
        Self::from_fn(self.dim(), |i, j| self.mat[(i, j)] * factor)
    }

    /// `tr(self · rho)`.
    pub fn expectation(&self, rho: &Operator) -> c64 {
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.mat[(i, k)] * rho.mat[(k, i)];
            }
        }
        acc
    }

    /// Largest `|a_ij − conj(a_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let d = self.dim();
        Self::from_fn(d, |i, j| (self.mat[(i, j)] + self.mat[(j, i)].conj()) * 0.5)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermitian_part();
        let mut vals = h.mat.self_adjoint_eigenvalues(faer::Side::Lower).map_err(|_| Error::NonConvergence { residual: f64::NAN })?;
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    /// Real diagonal, e.g. the level populations of a density matrix.
    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// Maximum absolute entry difference.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        worst
    }

    fn nonzeros(&self) -> Vec<(usize, usize, c64)> {
        let d = self.dim();
        let mut out = Vec::new();
        for j in 0..d {
            for i in 0..d {
                let v = self.mat[(i, j)];
                if v != ZERO {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { mat: &self.mat * &rhs.mat }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { mat: &self.mat - &rhs.mat }
    }
}

/// Tensor product, `(a ⊗ b)[iμ, jν] = a[i, j]·b[μ, ν]`.
pub fn kron(a: &Operator, b: &Operator) -> Result<Operator> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da.checked_mul(db).ok_or(Error::DimensionCap { requested: usize::MAX, cap: dim_cap() })?;
    check_dim(dim)?;
    Ok(Operator::from_fn(dim, |r, c| a.mat[(r / db, c / db)] * b.mat[(r % db, c % db)]))
}

/// A linear map on vectorized density matrices (units of 1/time).
#[derive(Clone, Debug)]
pub struct Superoperator {
    dim: usize,
    mat: Mat<c64>,
}

impl Superoperator {
    /// The zero map on `dim`-dimensional density matrices.
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, mat: Mat::zeros(dim * dim, dim * dim) })
    }

    pub fn from_matrix(dim: usize, mat: Mat<c64>) -> Result<Self> {
        if mat.nrows() != dim * dim || mat.ncols() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: mat.nrows() });
        }
        Ok(Self { dim, mat })
    }

    /// `ρ ↦ −i[H, ρ]`.
    pub fn hamiltonian(h: &Operator) -> Result<Self> {
        let mut s = Self::zeros(h.dim())?;
        s.add_hamiltonian(h)?;
        Ok(s)
    }

    /// Hilbert-space dimension of the density matrices this map acts on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm_l2()
    }

    fn check_operand(&self, op: &Operator) -> Result<()> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: op.dim() });
        }
        Ok(())
    }

    /// Add the map `ρ ↦ coeff · A ρ B`, i.e. `coeff · (Bᵀ ⊗ A)`.
    pub fn add_sandwich(&mut self, coeff: c64, a: &Operator, b: &Operator) -> Result<()> {
        self.check_operand(a)?;
        self.check_operand(b)?;
        let d = self.dim;
        let a_nz = a.nonzeros();
        let b_nz = b.nonzeros();
        // (AρB)[i, j] = Σ A[i, k] ρ[k, l] B[l, j]
        for &(l, j, bv) in &b_nz {
            let cb = coeff * bv;
            for &(i, k, av) in &a_nz {
                self.mat[(i + j * d, k + l * d)] += cb * av;
            }
        }
        Ok(())
    }

    /// Add `ρ ↦ −i[H, ρ]`.
    pub fn add_hamiltonian(&mut self, h: &Operator) -> Result<()> {
        let eye = Operator::identity(self.dim);
        self.add_sandwich(c64::new(0.0, -1.0), h, &eye)?;
        self.add_sandwich(c64::new(0.0, 1.0), &eye, h)
    }

    /// Add `rate · (LρL† − ½{L†L, ρ})`.
    pub fn add_dissipator(&mut self, l: &Operator, rate: f64) -> Result<()> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(invalid("rate", format!("dissipator rate must be finite and >= 0, got {rate}")));
        }
        self.check_operand(l)?;
        if rate == 0.0 {
            return Ok(());
        }
        let ldag = l.adjoint();
        let ldl = &ldag * l;
        let eye = Operator::identity(self.dim);
        let r = c64::new(rate, 0.0);
        let h = c64::new(-0.5 * rate, 0.0);
        self.add_sandwich(r, l, &ldag)?;
        self.add_sandwich(h, &ldl, &eye)?;
        self.add_sandwich(h, &eye, &ldl)
    }

    /// Apply the map to a density matrix.
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        self.check_operand(rho)?;
        let v = rho.vectorize();
        let n = self.dim * self.dim;
        let mut out = vec![ZERO; n];
        for (c, &x) in v.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += self.mat[(r, c)] * x;
            }
        }
        Operator::from_vectorized(self.dim, &out)
    }

    /// Largest `|tr(𝓛[E_c])|` over basis elements; zero for trace-preserving generators.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        (0..n).map(|c| (0..d).map(|i| self.mat[(i + i * d, c)]).sum::<c64>().norm()).fold(0.0, f64::max)
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        Superoperator { dim: self.dim, mat: &self.mat + &rhs.mat }
    }
}

/// `rate · (LρL† − ½{L†L, ρ})` as a superoperator.
pub fn lindblad_dissipator(l: &Operator, rate: f64) -> Result<Superoperator> {
    let mut s = Superoperator::zeros(l.dim())?;
    s.add_dissipator(l, rate)?;
    Ok(s)
}

/// Tuning knobs for [`steady_state_with`].
#[derive(Clone, Copy, Debug)]
pub struct SteadyStateOptions {
    /// Inverse-iteration shift, relative to `‖𝓛‖`.
    pub shift: f64,
    /// Eigenvalues below `null_tolerance · ‖𝓛‖` count towards the null space.
    pub null_tolerance: f64,
    /// Required `‖𝓛[ρ]‖ / ‖𝓛‖`.
    pub residual_tolerance: f64,
    pub max_iterations: usize,
    /// Largest superoperator size (`dim²`) for the eigendecomposition fallback.
    pub eigen_fallback_limit: usize,
    /// Re-solves on the population-balanced Liouvillian (see [`balance_weights`]).
    pub balance_rounds: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            shift: 1e-14,
            null_tolerance: 1e-11,
            residual_tolerance: 1e-10,
            max_iterations: 60,
            eigen_fallback_limit: 4096,
            balance_rounds: 4,
        }
    }
}

/// Trace-one Hermitian null vector of a Liouvillian.
pub fn steady_state(liouvillian: &Superoperator) -> Result<Operator> {
    steady_state_with(liouvillian, SteadyStateOptions::default())
}

fn trace_of_vec(v: &Mat<c64>, col: usize, d: usize) -> c64 {
    (0..d).map(|i| v[(i + i * d, col)]).sum()
}

fn relative_residual(l: &Superoperator, x: &Mat<c64>, norm: f64) -> f64 {
    let r = &l.mat * x;
    r.norm_l2() / norm
}

/// Deterministic pseudo-random start vectors for the null-space probe.
fn probe_column(n: usize, seed: u64) -> impl Fn(usize) -> c64 {
    move |i| {
        let mut z = (i as u64).wrapping_add(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        let re = (z & 0xFFFF_FFFF) as f64 / u32::MAX as f64 - 0.5;
        let im = (z >> 32) as f64 / u32::MAX as f64 - 0.5;
        let _ = n;
        c64::new(re, im)
    }
}

/// Dimension of the numerical null space, probed with block inverse iteration
/// and Rayleigh–Ritz on the resulting three-dimensional subspace.
fn null_space_dimension(l: &Superoperator, lu: &PartialPivLu<c64>, norm: f64, opts: &SteadyStateOptions) -> Result<usize> {
    let d = l.dim;
    let n = d * d;
    let p = n.min(3);
    let mut x = Mat::<c64>::from_fn(n, p, |i, j| {
        if j == 0 {
            if i % (d + 1) == 0 {
                c64::new(1.0, 0.0)
            } else {
                ZERO
            }
        } else {
            probe_column(n, j as u64)(i)
        }
    });
    linalg::orthonormalize(&mut x);
    for _ in 0..6 {
        x = lu.solve(&x);
        linalg::orthonormalize(&mut x);
    }
    let h = x.adjoint() * (&l.mat * &x);
    let ritz = h.eigenvalues().map_err(|_| Error::NonConvergence { residual: f64::NAN })?;
    Ok(ritz.iter().filter(|mu| mu.norm() <= opts.null_tolerance * norm).count())
}

/// [`steady_state`] with explicit solver options.
///
/// Uses shifted inverse iteration with trace normalization; when that does not
/// reach the residual target and `dim² ≤ eigen_fallback_limit`, the eigenvector
/// of the full decomposition with the smallest eigenvalue is used instead.
pub fn steady_state_with(liouvillian: &Superoperator, opts: SteadyStateOptions) -> Result<Operator> {
    let d = liouvillian.dim;
    let n = d * d;
    let norm = liouvillian.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateNullSpace { nullity: n });
    }
    let mut shifted = liouvillian.mat.clone();
    let sigma = opts.shift * norm;
    for i in 0..n {
        shifted[(i, i)] += c64::new(sigma, 0.0);
    }
    let lu = shifted.partial_piv_lu();

    let nullity = null_space_dimension(liouvillian, &lu, norm, &opts)?;
    if nullity > 1 {
        return Err(Error::DegenerateNullSpace { nullity });
    }

    let start = Mat::<c64>::from_fn(n, 1, |i, _| if i % (d + 1) == 0 { c64::new(1.0 / d as f64, 0.0) } else { ZERO });
    let (mut x, mut residual) = inverse_iteration(&lu, start, d, &opts, |v| relative_residual(liouvillian, v, norm));

    if !(residual <= opts.residual_tolerance) && n <= opts.eigen_fallback_limit {
        let evd = liouvillian.mat.eigen().map_err(|_| Error::NonConvergence { residual })?;
        let s = evd.S();
        let k = (0..n).min_by(|&a, &b| s[a].norm().total_cmp(&s[b].norm())).unwrap_or(0);
        let u = evd.U();
        let mut cand = Mat::<c64>::from_fn(n, 1, |i, _| u[(i, k)]);
        let tr = trace_of_vec(&cand, 0, d);
        if tr.norm() > 0.0 {
            for i in 0..n {
                cand[(i, 0)] /= tr;
            }
            let r = relative_residual(liouvillian, &cand, norm);
            if r < residual {
                x = cand;
                residual = r;
            }
        }
    }

    if !(residual <= opts.residual_tolerance) {
        return Err(Error::NonConvergence { residual });
    }
    let mut rho = finish_state(d, &x)?;

    // Small populations only carry absolute accuracy ~ eps·‖ρ‖ from the plain
    // solve; re-solving the similarity-scaled generator restores relative accuracy.
    for _ in 0..opts.balance_rounds {
        let w = balance_weights(&rho);
        let scaled = Mat::<c64>::from_fn(n, n, |r, c| liouvillian.mat[(r, c)] * (w[c] / w[r]));
        let scaled_norm = scaled.norm_l2();
        let mut shifted = scaled.clone();
        for i in 0..n {
            shifted[(i, i)] += c64::new(opts.shift * scaled_norm, 0.0);
        }
        let lu = shifted.partial_piv_lu();
        let start = Mat::<c64>::from_fn(n, 1, |i, _| x[(i, 0)] / w[i]);
        let (xs, _) = inverse_iteration_weighted(&scaled, &lu, start, d, &w, &opts);
        let cand = Mat::<c64>::from_fn(n, 1, |i, _| xs[(i, 0)] * w[i]);
        let tr = trace_of_vec(&cand, 0, d);
        if tr.norm() == 0.0 || !tr.re.is_finite() {
            break;
        }
        let cand = Mat::<c64>::from_fn(n, 1, |i, _| cand[(i, 0)] / tr);
        let r = relative_residual(liouvillian, &cand, norm);
        if !(r <= opts.residual_tolerance) {
            break;
        }
        let next = finish_state(d, &cand)?;
        let change = (0..d)
            .map(|i| {
                let (a, b) = (rho.get(i, i).re, next.get(i, i).re);
                (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max);
        x = cand;
        rho = next;
        if change <= 1e-14 {
            break;
        }
    }
    Ok(rho)
}

fn finish_state(d: usize, x: &Mat<c64>) -> Result<Operator> {
    let v: Vec<c64> = (0..d * d).map(|i| x[(i, 0)]).collect();
    let rho = Operator::from_vectorized(d, &v)?.hermitian_part();
    let tr = rho.trace();
    Ok(rho.scaled(c64::new(1.0, 0.0) / tr))
}

/// Smallest population used when forming balancing weights.
const BALANCE_FLOOR: f64 = 1e-200;

/// Column weights `w[i + j·d] = √(p_i p_j)` built from the populations of `rho`.
///
/// The similarity `W⁻¹ 𝓛 W` has the same spectrum as `𝓛` but its null vector
/// has entries of comparable size even when populations span many decades.
pub fn balance_weights(rho: &Operator) -> Vec<f64> {
    let d = rho.dim();
    let s: Vec<f64> = (0..d).map(|i| rho.get(i, i).re.abs().max(BALANCE_FLOOR).sqrt()).collect();
    let mut w = Vec::with_capacity(d * d);
    for j in 0..d {
        for i in 0..d {
            w.push(s[i] * s[j]);
        }
    }
    w
}

fn inverse_iteration(
    lu: &PartialPivLu<c64>,
    mut x: Mat<c64>,
    d: usize,
    opts: &SteadyStateOptions,
    residual_of: impl Fn(&Mat<c64>) -> f64,
) -> (Mat<c64>, f64) {
    let n = d * d;
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let mut next = lu.solve(&x);
        let tr = trace_of_vec(&next, 0, d);
        if tr.norm() == 0.0 || !tr.re.is_finite() {
            break;
        }
        for i in 0..n {
            next[(i, 0)] /= tr;
        }
        let change = (&next - &x).norm_l2();
        x = next;
        residual = residual_of(&x);
        if change <= 1e-15 * x.norm_l2() && residual <= opts.residual_tolerance {
            break;
        }
    }
    (x, residual)
}

/// Inverse iteration on a balanced generator, normalizing by the true trace
/// `Σ w_ii x_ii`.
fn inverse_iteration_weighted(
    scaled: &Mat<c64>,
    lu: &PartialPivLu<c64>,
    mut x: Mat<c64>,
    d: usize,
    w: &[f64],
    opts: &SteadyStateOptions,
) -> (Mat<c64>, f64) {
    let n = d * d;
    let norm = scaled.norm_l2();
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let mut next = lu.solve(&x);
        let tr: c64 = (0..d).map(|i| next[(i + i * d, 0)] * w[i + i * d]).sum();
        if tr.norm() == 0.0 || !tr.re.is_finite() {
            break;
        }
        for i in 0..n {
            next[(i, 0)] /= tr;
        }
        let change = (&next - &x).norm_l2();
        x = next;
        residual = (scaled * &x).norm_l2() / norm;
        if change <= 1e-15 * x.norm_l2() && residual <= opts.residual_tolerance {
            break;
        }
    }
    (x, residual)
}

/// `exp(t𝓛)` as a reusable propagator.
#[derive(Clone, Debug)]
pub struct Propagator {
    dim: usize,
    mat: Mat<c64>,
}

impl Propagator {
    pub fn new(liouvillian: &Superoperator, t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid("t", format!("evolution time must be finite and >= 0, got {t}")));
        }
        let n = liouvillian.dim * liouvillian.dim;
        let mat = if t == 0.0 {
            Mat::identity(n, n)
        } else {
            let scaled = faer::Scale(c64::new(t, 0.0)) * &liouvillian.mat;
            linalg::expm(scaled.as_ref())?
        };
        Ok(Self { dim: liouvillian.dim, mat })
    }

    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.dim() });
        }
        let n = self.dim * self.dim;
        let v = Mat::<c64>::from_fn(n, 1, |i, _| {
            let (r, c) = (i % self.dim, i / self.dim);
            rho.get(r, c)
        });
        let out = &self.mat * &v;
        let flat: Vec<c64> = (0..n).map(|i| out[(i, 0)]).collect();
        Operator::from_vectorized(self.dim, &flat)
    }
}

/// Trace drift tolerated by [`evolve`].
pub const EVOLVE_TRACE_TOLERANCE: f64 = 1e-8;

/// `exp(t𝓛)[ρ₀]`.
pub fn evolve(liouvillian: &Superoperator, rho0: &Operator, t: f64) -> Result<Operator> {
    let rho = Propagator::new(liouvillian, t)?.apply(rho0)?;
    let drift = (rho.trace() - rho0.trace()).norm();
    if drift > EVOLVE_TRACE_TOLERANCE {
        return Err(Error::NonConvergence { residual: drift });
    }
    Ok(rho)
}

/// Condition-number ceiling for resolvent solves.
pub const RESOLVENT_CONDITION_LIMIT: f64 = 1e14;

/// Factorized `(−𝓛)` restricted to the decaying subspace of a Liouvillian.
///
/// The stationary mode is removed with the rank-one completion
/// `M = −𝓛 + vec(ρ_ss) vec(I)†`: on traceless inputs `M⁻¹` coincides with the
/// inverse of `−𝓛` on its decaying subspace, and `M` itself is regular.
pub struct Resolvent {
    dim: usize,
    rho_ss: Operator,
    weights: Vec<f64>,
    lu: PartialPivLu<c64>,
    condition: f64,
}

impl Resolvent {
    /// Factorizes the completion after the same population balancing used by
    /// [`steady_state`], so tiny correlations keep their relative accuracy.
    pub fn new(liouvillian: &Superoperator, rho_ss: &Operator) -> Result<Self> {
        let d = liouvillian.dim;
        if rho_ss.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho_ss.dim() });
        }
        let n = d * d;
        let w = balance_weights(rho_ss);
        let u = rho_ss.vectorize();
        // W⁻¹ (−𝓛 + u 1ᵀ) W
        let mut m = Mat::<c64>::from_fn(n, n, |r, c| -liouvillian.mat[(r, c)] * (w[c] / w[r]));
        for k in 0..d {
            let c = k + k * d;
            for (r, ur) in u.iter().enumerate() {
                m[(r, c)] += *ur * (w[c] / w[r]);
            }
        }
        let m_norm = linalg::one_norm(m.as_ref());
        let lu = m.partial_piv_lu();
        let condition = m_norm * linalg::inverse_one_norm_estimate(&lu, n);
        if !(condition <= RESOLVENT_CONDITION_LIMIT) {
            return Err(Error::IllConditioned { condition });
        }
        Ok(Self { dim: d, rho_ss: rho_ss.clone(), weights: w, lu, condition })
    }

    /// Estimated 1-norm condition number of the balanced, regularized resolvent.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `(−𝓛)⁻¹` applied to the decaying part of `v`.
    pub fn solve(&self, v: &Operator) -> Result<Operator> {
        let d = self.dim;
        let n = d * d;
        let tr = v.trace();
        let w = &self.weights;
        let mut rhs = Mat::<c64>::from_fn(n, 1, |i, _| (v.get(i % d, i / d) - self.rho_ss.get(i % d, i / d) * tr) / w[i]);
        self.lu.solve_in_place(&mut rhs);
        let flat: Vec<c64> = (0..n).map(|i| rhs[(i, 0)] * w[i]).collect();
        Operator::from_vectorized(d, &flat)
    }

    /// `∫₀^∞ ds ⟨X(s) Y(0)⟩_ss` with the stationary part removed.
    pub fn correlation_integral(&self, x: &Operator, y: &Operator) -> Result<c64> {
        let y_rho = y * &self.rho_ss;
        let w = self.solve(&y_rho)?;
        Ok(x.expectation(&w))
    }
}

/// `∫₀^∞ ds ⟨X(s)Y(0)⟩_ss = tr{X · (−𝓛)⁻¹[Y ρ_ss]}` on the decaying subspace.
///
/// When the entries reachable from `Y ρ_ss` under `𝓛` contain no population,
/// the solve is done on that invariant block alone; otherwise through [`Resolvent`].
pub fn correlation_integral(liouvillian: &Superoperator, rho_ss: &Operator, x: &Operator, y: &Operator) -> Result<c64> {
    let v = y * rho_ss;
    match coherence_block_solve(liouvillian, &v)? {
        Some(w) => Ok(x.expectation(&w)),
        None => Resolvent::new(liouvillian, rho_ss)?.correlation_integral(x, y),
    }
}

/// Vectorized indices reachable from `seed` through nonzero entries of `𝓛`.
fn invariant_block(liouvillian: &Superoperator, seed: &[usize]) -> Vec<usize> {
    let n = liouvillian.mat.nrows();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = seed.to_vec();
    for &i in seed {
        seen[i] = true;
    }
    while let Some(c) = stack.pop() {
        for (r, s) in seen.iter_mut().enumerate() {
            if !*s && liouvillian.mat[(r, c)] != c64::new(0.0, 0.0) {
                *s = true;
                stack.push(r);
            }
        }
    }
    (0..n).filter(|&i| seen[i]).collect()
}

/// `(−𝓛)⁻¹ v` on the invariant block spanned from the support of `v`, or `None`
/// when that block contains a population and the stationary mode must be removed.
pub(crate) fn coherence_block_solve(liouvillian: &Superoperator, v: &Operator) -> Result<Option<Operator>> {
    let d = liouvillian.dim;
    if v.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
    }
    let flat = v.vectorize();
    let seed: Vec<usize> = (0..d * d).filter(|&i| flat[i] != c64::new(0.0, 0.0)).collect();
    let block = invariant_block(liouvillian, &seed);
    if block.is_empty() || block.iter().any(|&i| i % d == i / d) {
        return Ok(None);
    }
    let k = block.len();
    let m = Mat::<c64>::from_fn(k, k, |r, c| -liouvillian.mat[(block[r], block[c])]);
    let m_norm = linalg::one_norm(m.as_ref());
    let lu = m.partial_piv_lu();
    let condition = m_norm * linalg::inverse_one_norm_estimate(&lu, k);
    if !(condition <= RESOLVENT_CONDITION_LIMIT) {
        return Err(Error::IllConditioned { condition });
    }
    let mut rhs = Mat::<c64>::from_fn(k, 1, |i, _| flat[block[i]]);
    lu.solve_in_place(&mut rhs);
    let mut out = vec![c64::new(0.0, 0.0); d * d];
    for (i, &b) in block.iter().enumerate() {
        out[b] = rhs[(i, 0)];
    }
    Ok(Some(Operator::from_vectorized(d, &out)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> c64 {
        c64::new(re, 0.0)
    }

    #[test]
    fn kron_identities() {
        let k = kron(&Operator::identity(2), &Operator::identity(3)).unwrap();
        assert_eq!(k.max_abs_diff(&Operator::identity(6)), 0.0);
        let k = kron(&Operator::diagonal(&[1.0, 0.0]), &Operator::diagonal(&[2.0, 3.0])).unwrap();
        assert_eq!(k.max_abs_diff(&Operator::diagonal(&[2.0, 3.0, 0.0, 0.0])), 0.0);
    }

    #[test]
    fn kron_matches_quadruple_loop() {
        // σ⁺ on a qubit and a† on three Fock levels.
        let sp = Operator::ket_bra(2, 1, 0);
        let adag = Operator::from_fn(3, |i, j| if i == j + 1 { c((i as f64).sqrt()) } else { c(0.0) });
        let k = kron(&sp, &adag).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for mu in 0..3 {
                    for nu in 0..3 {
                        assert_eq!(k.get(i * 3 + mu, j * 3 + nu), sp.get(i, j) * adag.get(mu, nu));
                    }
                }
            }
        }
    }

    #[test]
    fn kron_respects_cap() {
        let big = Operator::identity(dim_cap());
        assert!(matches!(kron(&big, &Operator::identity(2)), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn zero_rate_dissipator_is_zero() {
        let s = lindblad_dissipator(&Operator::ket_bra(2, 0, 1), 0.0).unwrap();
        assert_eq!(s.norm(), 0.0);
    }

    #[test]
    fn negative_rate_rejected() {
        assert!(lindblad_dissipator(&Operator::ket_bra(2, 0, 1), -1.0).is_err());
    }

    #[test]
    fn two_level_decay_derivative() {
        // basis (g, e); σ⁻ = |g⟩⟨e|
        let gamma = 0.7;
        let s = lindblad_dissipator(&Operator::ket_bra(2, 0, 1), gamma).unwrap();
        let excited = Operator::ket_bra(2, 1, 1);
        let drho = s.apply(&excited).unwrap();
        assert!((drho.get(1, 1) - c(-gamma)).norm() < 1e-15);
        assert!((drho.get(0, 0) - c(gamma)).norm() < 1e-15);
    }

    #[test]
    fn pure_decay_steady_state_is_ground() {
        let s = lindblad_dissipator(&Operator::ket_bra(2, 0, 1), 1.3).unwrap();
        let rho = steady_state(&s).unwrap();
        assert!((rho.get(0, 0) - c(1.0)).norm() < 1e-12);
        assert!(rho.get(1, 1).norm() < 1e-12);
    }

    #[test]
    fn thermal_two_level_detailed_balance() {
        let (up, down) = (0.3, 1.1);
        let mut s = lindblad_dissipator(&Operator::ket_bra(2, 0, 1), down).unwrap();
        s.add_dissipator(&Operator::ket_bra(2, 1, 0), up).unwrap();
        let rho = steady_state(&s).unwrap();
        assert!((rho.get(1, 1).re - up / (up + down)).abs() < 1e-12);
        assert!((rho.get(0, 0).re - down / (up + down)).abs() < 1e-12);
    }

    #[test]
    fn closed_system_has_degenerate_null_space() {
        let h = Operator::diagonal(&[0.0, 1.0, 2.5]);
        let s = Superoperator::hamiltonian(&h).unwrap();
        match steady_state(&s) {
            Err(Error::DegenerateNullSpace { nullity }) => assert!(nullity >= 2),
            other => panic!("expected degenerate null space, got {other:?}"),
        }
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let s = lindblad_dissipator(&Operator::ket_bra(2, 0, 1), 1.0).unwrap();
        let rho = Operator::from_fn(2, |i, j| if i == j { c(0.5) } else { c64::new(0.1, 0.2 * (i as f64 - j as f64)) });
        let out = evolve(&s, &rho, 0.0).unwrap();
        assert_eq!(out.max_abs_diff(&rho), 0.0);
        assert!(evolve(&s, &rho, -1.0).is_err());
    }

    #[test]
    fn pi_pulse_swaps_populations() {
        let rabi = 2.0;
        let h = Operator::from_fn(2, |i, j| if i != j { c(0.5 * rabi) } else { c(0.0) });
        let s = Superoperator::hamiltonian(&h).unwrap();
        let rho = evolve(&s, &Operator::ket_bra(2, 0, 0), std::f64::consts::PI / rabi).unwrap();
        assert!((rho.get(1, 1).re - 1.0).abs() < 1e-12);
        assert!(rho.get(0, 0).re.abs() < 1e-12);
    }

    #[test]
    fn two_level_correlation_integral_is_two_over_gamma() {
        // ⟨σ⁻(s)σ⁺(0)⟩ = e^{−γs/2} from the ground state
        let gamma = 0.8;
        let sm = Operator::ket_bra(2, 0, 1);
        let sp = sm.adjoint();
        let s = lindblad_dissipator(&sm, gamma).unwrap();
        let rho = steady_state(&s).unwrap();
        let val = correlation_integral(&s, &rho, &sm, &sp).unwrap();
        assert!((val - c(2.0 / gamma)).norm() < 1e-12, "{val}");
        let zero = correlation_integral(&s, &rho, &Operator::zeros(2), &Operator::zeros(2)).unwrap();
        assert_eq!(zero, c(0.0));
    }

    #[test]
    fn trace_preservation_of_dissipator() {
        let l = Operator::from_fn(3, |i, j| c64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.3));
        let s = lindblad_dissipator(&l, 0.9).unwrap();
        assert!(s.trace_preservation_error() < 1e-14);
    }
}
