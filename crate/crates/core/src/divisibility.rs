//! CP-/P-divisibility, the semigroup property, and the trace-distance and
//! coherence monotonicity diagnostics for dephasing trajectories.
//!
//! For Hadamard channels the propagator between two times is itself a
//! Hadamard multiplication by the entrywise quotient Phi(t) o Phi(s)^{o-1};
//! complete positivity of that propagator is equivalent to plain positivity
//! and to positive semidefiniteness of the quotient matrix, so one PSD test
//! decides both divisibility notions at once.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{apply_channel, DephasingMatrix, DephasingTrajectory, QuditState};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Modulus below which a dephasing function counts as zero for inversion.
pub const INVERTIBILITY_THRESHOLD: f64 = 1e-14;

/// Entrywise quotient Phi(t) o Phi(s)^{o-1} for t >= s.
#[derive(Debug, Clone)]
pub struct PropagatorMatrix {
    s: f64,
    t: f64,
    m: CMat,
}

impl PropagatorMatrix {
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn entry(&self, j: usize, l: usize) -> Complex64 {
        self.m[(j, l)]
    }
}

pub fn hadamard_propagator(
    phi_t: &DephasingMatrix,
    phi_s: &DephasingMatrix,
) -> Result<PropagatorMatrix> {
    let d = phi_t.dim();
    if phi_s.dim() != d {
        return Err(Error::Model("dephasing matrices of different dimension".into()));
    }
    if phi_t.t() < phi_s.t() {
        return Err(Error::Model(format!(
            "propagator requires t >= s, got t = {}, s = {}",
            phi_t.t(),
            phi_s.t()
        )));
    }
    let mut m = CMat::from_element(d, d, c(1.0, 0.0));
    for j in 0..d {
        for l in 0..d {
            if j == l {
                continue;
            }
            let denom = phi_s.entry(j, l);
            if denom.norm() < INVERTIBILITY_THRESHOLD {
                return Err(Error::NotInvertible {
                    j,
                    l,
                    t: phi_s.t(),
                    modulus: denom.norm(),
                });
            }
            m[(j, l)] = phi_t.entry(j, l) / denom;
        }
    }
    Ok(PropagatorMatrix { s: phi_s.t(), t: phi_t.t(), m })
}

/// PSD verdict with a relative threshold: the matrix passes when its lowest
/// eigenvalue is at least -tol times the largest absolute eigenvalue, which
/// makes the verdict invariant under positive rescaling.
pub fn psd_verdict(m: &CMat, tol: f64) -> (bool, f64) {
    let (lo, hi) = linalg::min_max_eigenvalues(m);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    (lo >= -tol * scale, lo)
}

#[derive(Debug, Clone)]
pub struct DivisibilityOptions {
    /// Relative PSD threshold for the propagator test.
    pub psd_tol: f64,
    /// Residual threshold for the semigroup fit.
    pub semigroup_tol: f64,
    /// Absolute slack allowed in the per-entry modulus monotonicity check.
    pub mono_tol: f64,
    /// Check every ordered pair of grid times instead of adjacent ones.
    pub all_pairs: bool,
}

impl Default for DivisibilityOptions {
    fn default() -> Self {
        Self { psd_tol: 1e-10, semigroup_tol: 1e-9, mono_tol: 1e-12, all_pairs: false }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PsdViolation {
    pub s: f64,
    pub t: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct MonotonicityFlag {
    pub j: usize,
    pub l: usize,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct DivisibilityReport {
    pub invertible: bool,
    /// CP- and P-divisibility are decided by the same PSD test; both flags
    /// are exposed to document the equivalence and always agree.
    pub cp_divisible: bool,
    pub p_divisible: bool,
    pub semigroup: bool,
    pub first_violation: Option<PsdViolation>,
    pub monotone: Vec<MonotonicityFlag>,
    pub pairs_checked: usize,
}

pub fn divisibility_report(
    traj: &DephasingTrajectory,
    opts: &DivisibilityOptions,
) -> Result<DivisibilityReport> {
    let d = traj.dim();
    // invertibility gate
    for k in 0..traj.len() {
        let phi = traj.matrix(k);
        for j in 0..d {
            for l in 0..d {
                if j != l && phi.modulus(j, l) < INVERTIBILITY_THRESHOLD {
                    return Err(Error::NotInvertible {
                        j,
                        l,
                        t: phi.t(),
                        modulus: phi.modulus(j, l),
                    });
                }
            }
        }
    }

    let mut cp = true;
    let mut first_violation = None;
    let mut pairs_checked = 0;
    for k in 1..traj.len() {
        let starts = if opts.all_pairs { 0..k } else { (k - 1)..k };
        for i in starts {
            let prop = hadamard_propagator(traj.matrix(k), traj.matrix(i))?;
            let (ok, min_eig) = psd_verdict(prop.matrix(), opts.psd_tol);
            pairs_checked += 1;
            if !ok {
                cp = false;
                if first_violation.is_none() {
                    first_violation = Some(PsdViolation {
                        s: prop.s(),
                        t: prop.t(),
                        min_eigenvalue: min_eig,
                    });
                }
            }
        }
    }

    let mut monotone = Vec::new();
    for j in 0..d {
        for l in (j + 1)..d {
            let mut ok = true;
            for k in 1..traj.len() {
                if traj.matrix(k).modulus(j, l)
                    > traj.matrix(k - 1).modulus(j, l) + opts.mono_tol
                {
                    ok = false;
                    break;
                }
            }
            monotone.push(MonotonicityFlag { j, l, ok });
        }
    }

    let semigroup = if traj.len() >= 3 {
        is_semigroup(traj, opts.semigroup_tol)?.semigroup
    } else {
        false
    };

    Ok(DivisibilityReport {
        invertible: true,
        cp_divisible: cp,
        p_divisible: cp,
        semigroup,
        first_violation,
        monotone,
        pairs_checked,
    })
}

/// Convenience wrapper: default options with the given PSD tolerance.
pub fn is_cp_divisible(traj: &DephasingTrajectory, tol: f64) -> Result<DivisibilityReport> {
    divisibility_report(traj, &DivisibilityOptions { psd_tol: tol, ..Default::default() })
}

#[derive(Debug, Clone)]
pub struct SemigroupFit {
    /// Fitted rotation frequencies Omega_{jl}; antisymmetric, zero diagonal.
    pub omega: DMatrix<f64>,
    /// Fitted decay rates gamma_{jl}; symmetric, zero diagonal.
    pub gamma: DMatrix<f64>,
    /// Largest absolute deviation of log phi_{jl}(t_k) from the linear fit.
    pub residual: f64,
    /// True when the residual is below tolerance and every rate is
    /// nonnegative (within 1e-9).
    pub semigroup: bool,
}

/// Fit log phi_{jl}(t) = -(i Omega_{jl} + gamma_{jl}/2) t on the grid, with
/// phase unwrapping along the trajectory. The exact functional equation
/// phi(t) = phi(t-s) phi(s) holds iff the fit is exact, so the residual
/// measures the semigroup defect.
pub fn is_semigroup(traj: &DephasingTrajectory, tol: f64) -> Result<SemigroupFit> {
    if traj.len() < 3 {
        return Err(Error::Model(format!(
            "semigroup fit needs at least 3 grid points, got {}",
            traj.len()
        )));
    }
    let d = traj.dim();
    let times = traj.times();
    let mut omega = DMatrix::<f64>::zeros(d, d);
    let mut gamma = DMatrix::<f64>::zeros(d, d);
    let mut residual = 0.0f64;
    let mut rates_ok = true;
    for j in 0..d {
        for l in (j + 1)..d {
            let mut logs = Vec::with_capacity(traj.len());
            let mut prev_arg = 0.0f64;
            for (k, &tk) in times.iter().enumerate() {
                let phi = traj.matrix(k).entry(j, l);
                if phi.norm() < INVERTIBILITY_THRESHOLD {
                    return Err(Error::NotInvertible { j, l, t: tk, modulus: phi.norm() });
                }
                let mut arg = phi.arg();
                // unwrap against the previous grid point
                arg += (2.0 * std::f64::consts::PI)
                    * ((prev_arg - arg) / (2.0 * std::f64::consts::PI)).round();
                prev_arg = arg;
                logs.push(c(phi.norm().ln(), arg));
            }
            let mut num = c(0.0, 0.0);
            let mut den = 0.0f64;
            for (k, &t) in times.iter().enumerate() {
                num += logs[k] * c(t, 0.0);
                den += t * t;
            }
            let slope = num / c(den, 0.0);
            let om = -slope.im;
            let ga = -2.0 * slope.re;
            omega[(j, l)] = om;
            omega[(l, j)] = -om;
            gamma[(j, l)] = ga;
            gamma[(l, j)] = ga;
            if ga < -1e-9 {
                rates_ok = false;
            }
            for (k, &t) in times.iter().enumerate() {
                residual = residual.max((logs[k] - slope * c(t, 0.0)).norm());
            }
        }
    }
    Ok(SemigroupFit { omega, gamma, residual, semigroup: residual < tol && rates_ok })
}

/// Half the trace norm of the difference of two states.
pub fn trace_distance(a: &QuditState, b: &QuditState) -> f64 {
    0.5 * linalg::trace_norm_hermitian(&(a.matrix() - b.matrix()))
}

#[derive(Debug, Clone)]
pub struct BlpReport {
    /// (t_k, finite-difference derivative of the trace distance) at interior
    /// grid points.
    pub derivatives: Vec<(f64, f64)>,
    /// Derivatives exceeding the grid-dependent tolerance 10 h^2.
    pub violations: Vec<(f64, f64)>,
    pub monotone: bool,
}

/// Central-difference derivative of the trace distance of two evolved
/// states. Positive derivatives beyond 10 (grid step)^2 are flagged.
pub fn blp_check(
    traj: &DephasingTrajectory,
    rho1: &QuditState,
    rho2: &QuditState,
) -> Result<BlpReport> {
    if rho1.dim() != traj.dim() || rho2.dim() != traj.dim() {
        return Err(Error::Model("state dimension does not match the trajectory".into()));
    }
    let times = traj.times();
    let mut distances = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let a = apply_channel(traj.matrix(k), rho1)?;
        let b = apply_channel(traj.matrix(k), rho2)?;
        distances.push(trace_distance(&a, &b));
    }
    let mut derivatives = Vec::new();
    let mut violations = Vec::new();
    for k in 1..traj.len() - 1 {
        let span = times[k + 1] - times[k - 1];
        let deriv = (distances[k + 1] - distances[k - 1]) / span;
        let h = 0.5 * span;
        derivatives.push((times[k], deriv));
        if deriv > 10.0 * h * h {
            violations.push((times[k], deriv));
        }
    }
    Ok(BlpReport { monotone: violations.is_empty(), derivatives, violations })
}

#[derive(Debug, Clone)]
pub struct CoherenceReport {
    pub values: Vec<(f64, f64)>,
    pub monotone: bool,
    pub first_violation: Option<(f64, f64)>,
}

/// Checks that the coherence of the evolved state never increases along the
/// grid (up to `tol`); CP-divisible trajectories must pass.
pub fn coherence_monotonicity(
    traj: &DephasingTrajectory,
    rho: &QuditState,
    tol: f64,
) -> Result<CoherenceReport> {
    if rho.dim() != traj.dim() {
        return Err(Error::Model("state dimension does not match the trajectory".into()));
    }
    let mut values = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let evolved = apply_channel(traj.matrix(k), rho)?;
        values.push((traj.times()[k], evolved.coherence()));
    }
    let mut first_violation = None;
    for k in 1..values.len() {
        let increase = values[k].1 - values[k - 1].1;
        if increase > tol {
            first_violation = Some((values[k].0, increase));
            break;
        }
    }
    Ok(CoherenceReport { monotone: first_violation.is_none(), values, first_violation })
}
