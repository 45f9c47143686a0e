//! Small dense helpers on top of faer: matrix exponential, orthonormalization,
//! and a 1-norm condition estimate.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat, MatRef, Scale};

use crate::error::{Error, Result};

pub(crate) fn one_norm(a: MatRef<'_, c64>) -> f64 {
    (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

// Padé(13) coefficients and the matching scaling threshold.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub(crate) fn expm(a: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let n = a.nrows();
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::NonFinite { context: "expm input" });
    }
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = 0.5_f64.powi(squarings);
    let a = Scale(c64::new(scale, 0.0)) * a;

    let b = |k: usize| Scale(c64::new(PADE13[k], 0.0));
    let eye = Mat::<c64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (b(13) * &a6 + b(11) * &a4 + b(9) * &a2);
    let u_poly = inner_u + b(7) * &a6 + b(5) * &a4 + b(3) * &a2 + b(1) * &eye;
    let u = &a * u_poly;
    let inner_v = &a6 * (b(12) * &a6 + b(10) * &a4 + b(8) * &a2);
    let v = inner_v + b(6) * &a6 + b(4) * &a4 + b(2) * &a2 + b(0) * &eye;

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom.partial_piv_lu().solve(&numer);
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.col_iter().any(|c| c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
        return Err(Error::NonFinite { context: "expm" });
    }
    Ok(r)
}

/// Modified Gram–Schmidt on the columns of `x`, in place. Returns the number of
/// columns that survived (columns that collapse to zero are left as zero).
pub(crate) fn orthonormalize(x: &mut Mat<c64>) -> usize {
    let mut rank = 0;
    for j in 0..x.ncols() {
        for k in 0..j {
            let mut dot = c64::new(0.0, 0.0);
            for i in 0..x.nrows() {
                dot += x[(i, k)].conj() * x[(i, j)];
            }
            for i in 0..x.nrows() {
                let v = x[(i, k)];
                x[(i, j)] -= dot * v;
            }
        }
        let norm = x.col(j).norm_l2();
        if norm > 0.0 {
            for i in 0..x.nrows() {
                x[(i, j)] /= norm;
            }
            rank += 1;
        }
    }
    rank
}

/// Hager–Higham estimate of `‖A⁻¹‖₁` from an existing LU factorization.
pub(crate) fn inverse_one_norm_estimate(lu: &PartialPivLu<c64>, n: usize) -> f64 {
    let mut x = Mat::<c64>::from_fn(n, 1, |_, _| c64::new(1.0 / n as f64, 0.0));
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = lu.solve(&x);
        estimate = (0..n).map(|i| y[(i, 0)].norm()).sum::<f64>();
        let xi = Mat::<c64>::from_fn(n, 1, |i, _| {
            let v = y[(i, 0)];
            let m = v.norm();
            if m == 0.0 {
                c64::new(1.0, 0.0)
            } else {
                v / m
            }
        });
        let z = lu.solve_adjoint(&xi);
        let (jmax, zmax) = (0..n).map(|i| (i, z[(i, 0)].norm())).fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
        let ztx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * x[(i, 0)]).re).sum();
        if zmax <= ztx {
            break;
        }
        x = Mat::<c64>::zeros(n, 1);
        x[(jmax, 0)] = c64::new(1.0, 0.0);
    }
    estimate
}
