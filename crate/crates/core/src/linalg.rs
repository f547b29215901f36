//! Dense complex linear algebra helpers shared by the model and analysis
//! modules: Hermitian eigendecomposition, certified unitary exponentials,
//! PSD tests, trace norms, and partial traces.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Operator-norm bound on unitarity defect accepted for matrix exponentials.
pub const UNITARITY_TOL: f64 = 1e-12;

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for l in j..n {
            worst = worst.max((m[(j, l)] - m[(l, j)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues (ascending is
/// not guaranteed by nalgebra, so do not rely on order) and unitary columns.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let se = nalgebra::linalg::SymmetricEigen::new(m.clone());
    (se.eigenvalues.iter().copied().collect(), se.eigenvectors)
}

pub fn min_max_eigenvalues(m: &CMat) -> (f64, f64) {
    let (vals, _) = herm_eig(m);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// e^{-i t H} for Hermitian `h`, via eigendecomposition. The result is
/// certified unitary: ||U^dag U - I|| < `UNITARITY_TOL` in operator norm.
pub fn herm_exp(h: &CMat, t: f64) -> Result<CMat> {
    let n = h.nrows();
    let (vals, vecs) = herm_eig(h);
    let mut scaled = vecs.clone();
    for (k, lam) in vals.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -t * lam);
        for r in 0..n {
            scaled[(r, k)] *= phase;
        }
    }
    let u = &scaled * vecs.adjoint();
    let mut defect = u.adjoint() * &u;
    for j in 0..n {
        defect[(j, j)] -= Complex64::new(1.0, 0.0);
    }
    // Frobenius dominates the operator norm; only fall back to the exact
    // spectral norm when the cheap bound is inconclusive.
    let frob = defect.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if frob >= UNITARITY_TOL {
        let (lo, hi) = min_max_eigenvalues(&defect);
        let op = lo.abs().max(hi.abs());
        if op >= UNITARITY_TOL {
            return Err(Error::Model(format!(
                "matrix exponential failed the unitarity certificate: defect {op:e}"
            )));
        }
    }
    Ok(u)
}

/// Principal square root of a PSD matrix. Eigenvalues in [-tol, 0) are
/// clamped to zero; more negative ones are a caller bug.
pub fn psd_sqrt(m: &CMat, tol: f64) -> Result<CMat> {
    let n = m.nrows();
    let (vals, vecs) = herm_eig(m);
    let mut scaled = vecs.clone();
    for (k, lam) in vals.iter().enumerate() {
        if *lam < -tol {
            return Err(Error::Model(format!(
                "matrix is not positive semidefinite: eigenvalue {lam:e}"
            )));
        }
        let root = lam.max(0.0).sqrt();
        for r in 0..n {
            scaled[(r, k)] *= Complex64::new(root, 0.0);
        }
    }
    Ok(&scaled * vecs.adjoint())
}

/// Trace norm of a Hermitian matrix: sum of absolute eigenvalues.
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    let (vals, _) = herm_eig(m);
    vals.iter().map(|v| v.abs()).sum()
}

pub fn kronecker(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Partial trace over the bath factor of a (d * d_bath)-dimensional operator,
/// with indices ordered system-major: row = j * d_bath + beta.
pub fn partial_trace_bath(full: &CMat, d: usize, d_bath: usize) -> CMat {
    assert_eq!(full.nrows(), d * d_bath);
    let mut out = CMat::zeros(d, d);
    for j in 0..d {
        for l in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for beta in 0..d_bath {
                acc += full[(j * d_bath + beta, l * d_bath + beta)];
            }
            out[(j, l)] = acc;
        }
    }
    out
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Kahan-compensated complex accumulator; atomic spectral sums run over 1e5
/// terms and plain summation would drift past the 1e-12 validation gates.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    sum_re: f64,
    sum_im: f64,
    comp_re: f64,
    comp_im: f64,
}

impl KahanComplex {
    pub fn add(&mut self, z: Complex64) {
        let y = z.re - self.comp_re;
        let t = self.sum_re + y;
        self.comp_re = (t - self.sum_re) - y;
        self.sum_re = t;

        let y = z.im - self.comp_im;
        let t = self.sum_im + y;
        self.comp_im = (t - self.sum_im) - y;
        self.sum_im = t;
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.sum_re, self.sum_im)
    }
}
