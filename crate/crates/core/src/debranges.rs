//! Krein equations, reproducing kernels and the Hermite–Biehler function of
//! the de Branges spaces `B_A^T` (polynomials of degree `< T` with the
//! scalar product `[F, G] = (C_T f, g)`, `F = sum f_k T_k`).
//!
//! The kernel has two independent evaluations:
//! `J^T_z(lambda) = sum_{n=1}^T conj(p_n(z)) p_n(lambda)` and
//! `J^T_z(lambda) = sum_{k=1}^T T_k(lambda) j_k` with `C_T j = conj(T(z))`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connecting::ConnectingMatrix;
use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::linalg::{ldl, Ldl};
use crate::moments::HankelMatrix;
use crate::scalar::Scalar;
use crate::spectral::{chebyshev_values, p_values};

/// Solution of `C_T j = conj(T_1(z), ..., T_T(z))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KreinSolution {
    pub j: Vec<Complex64>,
    pub z: Complex64,
    pub horizon: usize,
    /// `||C j - rhs||_inf / ||rhs||_inf`.
    pub residual: f64,
}

impl KreinSolution {
    /// `sum_k T_k(lambda) j_k`.
    pub fn kernel_at(&self, lambda: Complex64) -> Complex64 {
        let cheb = chebyshev_values(self.horizon, lambda);
        self.j.iter().enumerate().map(|(k, jk)| cheb[k + 1] * jk).sum()
    }
}

fn factor<S: Scalar>(m: &DMatrix<S>) -> Result<Ldl<S>> {
    ldl(m).map_err(|b| {
        Error::InvalidArgument(format!(
            "matrix is not positive definite (pivot {} at index {}); genuine response data always gives a positive definite connecting operator",
            b.pivot, b.index
        ))
    })
}

fn complex_solve(f: &Ldl<f64>, rhs: &[Complex64]) -> Vec<Complex64> {
    let re: Vec<f64> = rhs.iter().map(|v| v.re).collect();
    let im: Vec<f64> = rhs.iter().map(|v| v.im).collect();
    f.solve(&re).into_iter().zip(f.solve(&im)).map(|(x, y)| Complex64::new(x, y)).collect()
}

fn relative_residual(m: &DMatrix<f64>, x: &[Complex64], rhs: &[Complex64]) -> f64 {
    let n = x.len();
    let mut worst = 0.0_f64;
    for i in 0..n {
        let v: Complex64 = (0..n).map(|k| x[k] * m[(i, k)]).sum();
        worst = worst.max((v - rhs[i]).norm());
    }
    let scale = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Solves the Krein equation for `C_T` (the matrix is aligned to the
/// upper-left orientation first).
pub fn krein_solve(c: &ConnectingMatrix, z: Complex64) -> Result<KreinSolution> {
    let c = c.to_corner_top();
    let t = c.dim();
    let f = factor(c.matrix())?;
    let rhs: Vec<Complex64> = chebyshev_values(t, z)[1..].iter().map(|v| v.conj()).collect();
    let j = complex_solve(&f, &rhs);
    let residual = relative_residual(c.matrix(), &j, &rhs);
    Ok(KreinSolution { j, z, horizon: t, residual })
}

/// Krein solution held in precision `S` as real and imaginary parts.
///
/// `C_T` is often far too ill-conditioned for double precision (its
/// condition number grows geometrically in `T`), so the right-hand side,
/// the solve and the kernel sum all stay in `S`.
#[derive(Debug, Clone)]
pub struct KreinSolutionIn<S: Scalar> {
    pub re: Vec<S>,
    pub im: Vec<S>,
    pub z: Complex64,
}

/// `(Re T_k(z), Im T_k(z))` for `k = 0..=t`, in precision `S`.
pub fn chebyshev_parts<S: Scalar>(t: usize, z: Complex64) -> (Vec<S>, Vec<S>) {
    let (x, y) = (S::from_f64(z.re), S::from_f64(z.im));
    let mut re = vec![S::zero(), S::one()];
    let mut im = vec![S::zero(), S::zero()];
    for k in 1..t {
        let r = x.clone() * re[k].clone() - y.clone() * im[k].clone() - re[k - 1].clone();
        let i = x.clone() * im[k].clone() + y.clone() * re[k].clone() - im[k - 1].clone();
        re.push(r);
        im.push(i);
    }
    re.truncate(t + 1);
    im.truncate(t + 1);
    (re, im)
}

impl<S: Scalar> KreinSolutionIn<S> {
    /// `sum_k T_k(lambda) j_k`, summed in `S` and rounded at the end.
    pub fn kernel_at(&self, lambda: Complex64) -> Complex64 {
        let (tr, ti) = chebyshev_parts::<S>(self.re.len(), lambda);
        let (mut re, mut im) = (S::zero(), S::zero());
        for k in 0..self.re.len() {
            let (a, b) = (&tr[k + 1], &ti[k + 1]);
            re = re + a.clone() * self.re[k].clone() - b.clone() * self.im[k].clone();
            im = im + a.clone() * self.im[k].clone() + b.clone() * self.re[k].clone();
        }
        Complex64::new(re.to_f64(), im.to_f64())
    }

    /// `j` rounded to double.
    pub fn j_f64(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(r, i)| Complex64::new(r.to_f64(), i.to_f64())).collect()
    }
}

/// `C_T` factored once in precision `S`, for Krein solves at many `z`.
#[derive(Debug, Clone)]
pub struct KreinFactor<S: Scalar> {
    f: Ldl<S>,
}

pub fn krein_factor<S: Scalar>(c: &ConnectingMatrix<S>) -> Result<KreinFactor<S>> {
    Ok(KreinFactor { f: factor(c.to_corner_top().matrix())? })
}

impl<S: Scalar> KreinFactor<S> {
    pub fn solve(&self, z: Complex64) -> KreinSolutionIn<S> {
        let (tr, ti) = chebyshev_parts::<S>(self.f.dim(), z);
        let minus_im: Vec<S> = ti[1..].iter().map(|v| -v.clone()).collect();
        KreinSolutionIn { re: self.f.solve(&tr[1..]), im: self.f.solve(&minus_im), z }
    }
}

/// [`krein_solve`] in precision `S`.
pub fn krein_solve_in<S: Scalar>(c: &ConnectingMatrix<S>, z: Complex64) -> Result<KreinSolutionIn<S>> {
    Ok(krein_factor(c)?.solve(z))
}

/// Solves `S_T f = conj(1, z, ..., z^{T-1})`; the kernel is then
/// `sum_k f_k lambda^k` and `f = Lambda_T^* j`.
pub fn krein_solve_hankel(s: &HankelMatrix, z: Complex64) -> Result<Vec<Complex64>> {
    let f = factor(s.matrix())?;
    let mut rhs = Vec::with_capacity(s.dim());
    let mut pow = Complex64::new(1.0, 0.0);
    for _ in 0..s.dim() {
        rhs.push(pow.conj());
        pow *= z;
    }
    Ok(complex_solve(&f, &rhs))
}

/// `sum_{n=1}^T conj(p_n(z)) p_n(lambda)`.
pub fn kernel_polynomial_sum(coeffs: &JacobiCoefficients, t: usize, z: Complex64, lambda: Complex64) -> Result<Complex64> {
    let pz = p_values(coeffs, t, z)?;
    let pl = p_values(coeffs, t, lambda)?;
    Ok(pz.iter().zip(&pl).map(|(a, b)| a.conj() * b).sum())
}

/// Where the finite kernel comes from.
#[derive(Debug, Clone, Copy)]
pub enum KernelSource<'a> {
    /// Orthonormal polynomials of the coefficients, `T` terms.
    PolynomialSum(&'a JacobiCoefficients, usize),
    /// Krein equation for the given connecting operator.
    Krein(&'a ConnectingMatrix),
}

pub fn kernel_finite(source: KernelSource<'_>, z: Complex64, lambda: Complex64) -> Result<Complex64> {
    match source {
        KernelSource::PolynomialSum(coeffs, t) => kernel_polynomial_sum(coeffs, t, z, lambda),
        KernelSource::Krein(c) => Ok(krein_solve(c, z)?.kernel_at(lambda)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfiniteKernel {
    pub value: Complex64,
    /// Number of terms summed.
    pub order: usize,
}

pub const KERNEL_CAP: usize = 10_000;
const KERNEL_WINDOW: usize = 5;

/// Partial sums of `sum conj(p_n(z)) p_n(lambda)` until the last
/// `min(n, 5)` terms are all below `tol` relative to the partial sum.
pub fn kernel_infinite(coeffs: &JacobiCoefficients, z: Complex64, lambda: Complex64, tol: f64) -> Result<InfiniteKernel> {
    let one = Complex64::new(1.0, 0.0);
    let (mut pz_prev, mut pz) = (Complex64::default(), one);
    let (mut pl_prev, mut pl) = (Complex64::default(), one);
    let mut sum = Complex64::default();
    let mut recent: Vec<f64> = Vec::with_capacity(KERNEL_WINDOW);
    for n in 1..=KERNEL_CAP {
        let term = pz.conj() * pl;
        sum += term;
        if !sum.is_finite() {
            return Err(Error::SeriesNotConverging { order: n });
        }
        if recent.len() == KERNEL_WINDOW {
            recent.remove(0);
        }
        recent.push(term.norm());
        let scale = sum.norm();
        if scale > 0.0 && recent.iter().all(|&t| t < tol * scale) {
            return Ok(InfiniteKernel { value: sum, order: n });
        }
        // a_n p_{n+1} = (x - b_n) p_n - a_{n-1} p_{n-1}
        let (a_prev, a_n, b_n) = (coeffs.a(n - 1)?, coeffs.a(n)?, coeffs.b(n)?);
        let next_z = ((z - b_n) * pz - pz_prev * a_prev) / a_n;
        let next_l = ((lambda - b_n) * pl - pl_prev * a_prev) / a_n;
        pz_prev = std::mem::replace(&mut pz, next_z);
        pl_prev = std::mem::replace(&mut pl, next_l);
    }
    Err(Error::SeriesNotConverging { order: KERNEL_CAP })
}

/// `[F, G] = conj(f)^T C_T g` for coefficient vectors in the basis
/// `T_1, ..., T_T`.
pub fn scalar_product(f: &[Complex64], g: &[Complex64], c: &ConnectingMatrix) -> Result<Complex64> {
    let c = c.to_corner_top();
    let t = c.dim();
    if f.len() != t || g.len() != t {
        return Err(Error::InvalidArgument(format!(
            "coefficient vectors of length {} and {} do not match T = {t}",
            f.len(),
            g.len()
        )));
    }
    let m = c.matrix();
    Ok((0..t)
        .map(|i| f[i].conj() * (0..t).map(|k| g[k] * m[(i, k)]).sum::<Complex64>())
        .sum())
}

/// `E_T(z) = sqrt(pi) (1 - i z) J^T_i(z) / sqrt(J^T_i(i))`.
#[derive(Debug, Clone)]
pub struct HermiteBiehlerFunction {
    coeffs: JacobiCoefficients,
    horizon: usize,
    /// `conj(p_n(i))`, `n = 1..=T`.
    weights: Vec<Complex64>,
    /// `J^T_i(i) = sum |p_n(i)|^2`.
    norm_sq: f64,
}

pub fn hb_function(coeffs: &JacobiCoefficients, t: usize) -> Result<HermiteBiehlerFunction> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    let coeffs = coeffs.truncated(t - 1, t - 1)?;
    let pi = p_values(&coeffs, t, Complex64::i())?;
    let norm_sq = pi.iter().map(|v| v.norm_sqr()).sum();
    Ok(HermiteBiehlerFunction { weights: pi.iter().map(|v| v.conj()).collect(), coeffs, horizon: t, norm_sq })
}

impl HermiteBiehlerFunction {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn coefficients(&self) -> &JacobiCoefficients {
        &self.coeffs
    }

    /// `J^T_i(i)`, the squared norm of the kernel at `i`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `J^T_i(z)`.
    pub fn kernel_at_i(&self, z: Complex64) -> Complex64 {
        let p = p_values(&self.coeffs, self.horizon, z).expect("coefficients truncated to the horizon");
        self.weights.iter().zip(&p).map(|(w, v)| w * v).sum()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let lin = Complex64::new(1.0, 0.0) - Complex64::i() * z;
        lin * self.kernel_at_i(z) * (PI.sqrt() / self.norm_sq.sqrt())
    }

    /// `|E(z)| > |E(conj z)|`.
    pub fn hb_inequality(&self, z: Complex64) -> bool {
        self.eval(z).norm() > self.eval(z.conj()).norm()
    }
}

fn kernel_formula(e: &HermiteBiehlerFunction, z: Complex64, xi: Complex64) -> Complex64 {
    let num = e.eval(z).conj() * e.eval(xi) - e.eval(z.conj()) * e.eval(xi.conj()).conj();
    num / (Complex64::new(0.0, 2.0) * (z.conj() - xi))
}

const SINGULAR_GAP: f64 = 1e-8;
const SINGULAR_STEP: f64 = 1e-5;

/// `(conj(E(z)) E(xi) - E(conj z) conj(E(conj xi))) / (2 i (conj z - xi))`.
///
/// Near `xi = conj z` the removable singularity is bridged by averaging
/// the formula at `xi +- 1e-5`.
pub fn kernel_from_e(e: &HermiteBiehlerFunction, z: Complex64, xi: Complex64) -> Complex64 {
    if (z.conj() - xi).norm() < SINGULAR_GAP {
        let h = Complex64::new(SINGULAR_STEP, 0.0);
        return (kernel_formula(e, z, xi + h) + kernel_formula(e, z, xi - h)) * 0.5;
    }
    kernel_formula(e, z, xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstant {
    /// Mean of `kernel_from_e / J^T` over the sample points.
    pub mean: Complex64,
    /// Largest deviation of a single ratio from the mean.
    pub spread: f64,
}

/// Measures the constant linking the kernel of `E` to the polynomial
/// kernel `J^T` at the given `(z, xi)` pairs.
pub fn measure_kernel_constant(e: &HermiteBiehlerFunction, points: &[(Complex64, Complex64)]) -> Result<KernelConstant> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("need at least one sample point".into()));
    }
    let ratios: Vec<Complex64> = points
        .iter()
        .map(|&(z, xi)| Ok(kernel_from_e(e, z, xi) / kernel_polynomial_sum(&e.coeffs, e.horizon, z, xi)?))
        .collect::<Result<_>>()?;
    let mean = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
    Ok(KernelConstant { mean, spread })
}
