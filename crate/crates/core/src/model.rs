//! Finite-dimensional dephasing models.
//!
//! A block model is a family of Hermitian bath blocks H_0..H_{d-1} plus a
//! bath state rho_B. Its reduced dynamics multiplies each off-diagonal
//! element of a qudit state by phi_{jl}(t) = tr[exp(-itH_j) rho_B exp(itH_l)],
//! collected here into the dephasing matrix Phi(t). The same dephasing
//! matrices can come from a spectral measure with commuting blocks
//! H_j = h_j(H), evaluated as a discretized Fourier transform.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Absolute tolerance for Hermiticity, eigenvalue, and trace validation.
pub const STATE_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A validated Hermitian matrix; entries are symmetrized exactly on
/// construction once the defect passes the 1e-12 gate.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMat,
}

impl HermitianMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Model(format!(
                "Hermitian matrix must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = linalg::hermiticity_defect(&m);
        if defect > STATE_TOL {
            return Err(Error::Model(format!(
                "matrix is not Hermitian within {STATE_TOL:e}: defect {defect:e}"
            )));
        }
        let sym = (&m + m.adjoint()) * c(0.5, 0.0);
        Ok(Self { m: sym })
    }

    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        Self::new(CMat::from_row_slice(dim, dim, entries))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    /// exp(-i t H), certified unitary.
    pub fn evolution(&self, t: f64) -> Result<CMat> {
        linalg::herm_exp(&self.m, t)
    }
}

fn validate_density(m: &CMat, what: &str) -> Result<CMat> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Model(format!("{what} must be square and nonempty")));
    }
    let defect = linalg::hermiticity_defect(m);
    if defect > STATE_TOL {
        return Err(Error::Model(format!(
            "{what} is not Hermitian within {STATE_TOL:e}: defect {defect:e}"
        )));
    }
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let (lo, _) = linalg::min_max_eigenvalues(&sym);
    if lo < -STATE_TOL {
        return Err(Error::Model(format!(
            "{what} is not positive semidefinite: eigenvalue {lo:e}"
        )));
    }
    let tr = sym.trace();
    if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
        return Err(Error::Model(format!("{what} trace {tr} is not 1 within {STATE_TOL:e}")));
    }
    Ok(sym)
}

/// A density matrix on the d-dimensional system space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    m: CMat,
}

impl QuditState {
    pub fn new(m: CMat) -> Result<Self> {
        Ok(Self { m: validate_density(&m, "qudit state")? })
    }

    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        Self::new(CMat::from_row_slice(dim, dim, entries))
    }

    /// |v><v| / <v|v> for a nonzero amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= 0.0 {
            return Err(Error::Model("pure state requires a nonzero vector".into()));
        }
        let d = amplitudes.len();
        let mut m = CMat::zeros(d, d);
        for j in 0..d {
            for l in 0..d {
                m[(j, l)] = amplitudes[j] * amplitudes[l].conj() / norm_sqr;
            }
        }
        Self::new(m)
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut m = CMat::zeros(d, d);
        m[(k, k)] = c(1.0, 0.0);
        Self { m }
    }

    /// (1/d) sum_{jl} |j><l|, the maximally coherent state.
    pub fn maximally_coherent(d: usize) -> Self {
        let v = vec![c(1.0, 0.0); d];
        Self::pure(&v).expect("uniform amplitudes are nonzero")
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn coherence(&self) -> f64 {
        coherence(self)
    }
}

/// Sum of absolute off-diagonal elements, the l1 coherence measure.
pub fn coherence(rho: &QuditState) -> f64 {
    let d = rho.dim();
    let m = rho.matrix();
    let mut acc = 0.0;
    for j in 0..d {
        for l in 0..d {
            if j != l {
                acc += m[(j, l)].norm();
            }
        }
    }
    acc
}

/// The d x d matrix of dephasing functions at one time stamp. Unit diagonal
/// by construction, exactly Hermitian, entries bounded by one, and positive
/// semidefinite (it is a Gram matrix for any valid model).
#[derive(Debug, Clone)]
pub struct DephasingMatrix {
    phi: CMat,
    t: f64,
}

impl DephasingMatrix {
    pub fn new(phi: CMat, t: f64) -> Result<Self> {
        let d = phi.nrows();
        if d != phi.ncols() || d == 0 {
            return Err(Error::Model("dephasing matrix must be square".into()));
        }
        if t.is_nan() || t < 0.0 {
            return Err(Error::Model(format!("time stamp must be nonnegative, got {t}")));
        }
        let defect = linalg::hermiticity_defect(&phi);
        if defect > STATE_TOL {
            return Err(Error::Model(format!(
                "dephasing matrix is not Hermitian within {STATE_TOL:e}: defect {defect:e}"
            )));
        }
        let mut sym = (&phi + phi.adjoint()) * c(0.5, 0.0);
        for j in 0..d {
            let diag = sym[(j, j)];
            if (diag - c(1.0, 0.0)).norm() > STATE_TOL {
                return Err(Error::Model(format!(
                    "dephasing matrix diagonal entry ({j},{j}) = {diag} is not 1"
                )));
            }
            sym[(j, j)] = c(1.0, 0.0);
        }
        for j in 0..d {
            for l in 0..d {
                let a = sym[(j, l)].norm();
                if a > 1.0 + STATE_TOL {
                    return Err(Error::Model(format!(
                        "dephasing amplitude |phi_{j}{l}| = {a} exceeds 1"
                    )));
                }
            }
        }
        let (lo, hi) = linalg::min_max_eigenvalues(&sym);
        let scale = hi.abs().max(1.0);
        if lo < -1e-10 * scale {
            return Err(Error::Model(format!(
                "dephasing matrix is not positive semidefinite: eigenvalue {lo:e}"
            )));
        }
        Ok(Self { phi: sym, t })
    }

    /// Phi(0): the all-ones matrix.
    pub fn all_ones(d: usize) -> Self {
        Self { phi: CMat::from_element(d, d, c(1.0, 0.0)), t: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &CMat {
        &self.phi
    }

    pub fn entry(&self, j: usize, l: usize) -> Complex64 {
        self.phi[(j, l)]
    }

    pub fn modulus(&self, j: usize, l: usize) -> f64 {
        self.phi[(j, l)].norm()
    }
}

/// Hadamard (entrywise) dephasing channel: Lambda_t(rho) = Phi(t) o rho.
/// Populations are untouched because the diagonal of Phi is exactly one.
pub fn apply_channel(phi: &DephasingMatrix, rho: &QuditState) -> Result<QuditState> {
    let d = rho.dim();
    if phi.dim() != d {
        return Err(Error::Model(format!(
            "dimension mismatch: channel is {}-dimensional, state is {}-dimensional",
            phi.dim(),
            d
        )));
    }
    let mut out = CMat::zeros(d, d);
    for j in 0..d {
        for l in 0..d {
            out[(j, l)] = phi.entry(j, l) * rho.matrix()[(j, l)];
        }
    }
    QuditState::new(out)
}

/// Block system-bath model: d Hermitian bath blocks of a common bath
/// dimension plus the initial bath state.
#[derive(Debug, Clone)]
pub struct BlockModel {
    blocks: Vec<HermitianMatrix>,
    bath_state: CMat,
}

impl BlockModel {
    pub fn new(blocks: Vec<HermitianMatrix>, bath_state: CMat) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::Model(format!(
                "block model needs at least 2 blocks, got {}",
                blocks.len()
            )));
        }
        let d_bath = blocks[0].dim();
        for (j, b) in blocks.iter().enumerate() {
            if b.dim() != d_bath {
                return Err(Error::Model(format!(
                    "block {j} has bath dimension {} but block 0 has {d_bath}",
                    b.dim()
                )));
            }
        }
        let bath_state = validate_density(&bath_state, "bath state")?;
        if bath_state.nrows() != d_bath {
            return Err(Error::Model(format!(
                "bath state dimension {} does not match block dimension {d_bath}",
                bath_state.nrows()
            )));
        }
        Ok(Self { blocks, bath_state })
    }

    pub fn dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn bath_dim(&self) -> usize {
        self.blocks[0].dim()
    }

    pub fn block(&self, j: usize) -> &HermitianMatrix {
        &self.blocks[j]
    }

    pub fn bath_state(&self) -> &CMat {
        &self.bath_state
    }

    /// The full block-diagonal Hamiltonian on the (d * d_bath)-dimensional
    /// space, ordered system-major.
    pub fn full_hamiltonian(&self) -> CMat {
        let d = self.dim();
        let db = self.bath_dim();
        let mut full = CMat::zeros(d * db, d * db);
        for j in 0..d {
            let b = self.blocks[j].matrix();
            for r in 0..db {
                for s in 0..db {
                    full[(j * db + r, j * db + s)] = b[(r, s)];
                }
            }
        }
        full
    }

    /// Phi(t) with phi_{jl}(t) = tr[exp(-itH_j) rho_B exp(itH_l)], evaluated
    /// as the Gram matrix of the evolved square roots exp(-itH_j) sqrt(rho_B).
    pub fn dephasing_matrix(&self, t: f64) -> Result<DephasingMatrix> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Model(format!("time must be nonnegative, got {t}")));
        }
        let d = self.dim();
        if t == 0.0 {
            return Ok(DephasingMatrix::all_ones(d));
        }
        let root = linalg::psd_sqrt(&self.bath_state, STATE_TOL)?;
        let evolved: Vec<CMat> = self
            .blocks
            .iter()
            .map(|h| h.evolution(t).map(|u| u * &root))
            .collect::<Result<_>>()?;
        let mut phi = CMat::from_element(d, d, c(1.0, 0.0));
        for j in 0..d {
            for l in 0..d {
                if j == l {
                    continue;
                }
                // Hilbert-Schmidt inner product <A_l, A_j>
                let mut acc = c(0.0, 0.0);
                for (x, y) in evolved[l].iter().zip(evolved[j].iter()) {
                    acc += x.conj() * y;
                }
                phi[(j, l)] = acc;
            }
        }
        DephasingMatrix::new(phi, t)
    }

    /// Ground-truth reduced dynamics: conjugate rho (x) rho_B by the full
    /// unitary and trace out the bath. Kept as an independent code path from
    /// the Hadamard-channel route.
    pub fn reduced_dynamics_oracle(&self, rho: &QuditState, t: f64) -> Result<QuditState> {
        if rho.dim() != self.dim() {
            return Err(Error::Model(format!(
                "state dimension {} does not match model dimension {}",
                rho.dim(),
                self.dim()
            )));
        }
        if t.is_nan() || t < 0.0 {
            return Err(Error::Model(format!("time must be nonnegative, got {t}")));
        }
        let full_h = self.full_hamiltonian();
        let u = linalg::herm_exp(&full_h, t)?;
        let joint = linalg::kronecker(rho.matrix(), &self.bath_state);
        let evolved = &u * joint * u.adjoint();
        let reduced = linalg::partial_trace_bath(&evolved, self.dim(), self.bath_dim());
        QuditState::new(reduced)
    }
}

/// Free-function forms of the channel operations.
pub fn dephasing_matrix(model: &BlockModel, t: f64) -> Result<DephasingMatrix> {
    model.dephasing_matrix(t)
}

pub fn reduced_dynamics_oracle(model: &BlockModel, rho: &QuditState, t: f64) -> Result<QuditState> {
    model.reduced_dynamics_oracle(rho, t)
}

/// A purely atomic spectral measure: locations and nonnegative weights
/// summing to one.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    atoms: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Model("spectral measure has no atoms".into()));
        }
        // compensated summation: 1e5 atoms of weight 1/1e5 must still sum
        // to 1 within the 1e-12 gate
        let mut total = 0.0;
        let mut comp = 0.0;
        for &(x, w) in &atoms {
            if !x.is_finite() || !w.is_finite() {
                return Err(Error::Model("spectral measure atoms must be finite".into()));
            }
            if w < 0.0 {
                return Err(Error::Model(format!("negative weight {w} at location {x}")));
            }
            let y = w - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        }
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::Model(format!(
                "spectral measure weights sum to {total}, expected 1 within {STATE_TOL:e}"
            )));
        }
        Ok(Self { atoms })
    }

    /// Equal-mass quantile discretization of the Cauchy distribution with
    /// half-width gamma/2 centered at `center`. Weights are exactly 1/n, so
    /// normalization is exact and the heavy tails are represented by outer
    /// atoms instead of being truncated away.
    pub fn cauchy_quantile(center: f64, gamma: f64, n: usize) -> Result<Self> {
        if n == 0 || gamma <= 0.0 {
            return Err(Error::Model("cauchy measure needs n > 0 atoms and gamma > 0".into()));
        }
        let w = 1.0 / n as f64;
        let atoms = (0..n)
            .map(|a| {
                let u = (a as f64 + 0.5) / n as f64;
                (center + 0.5 * gamma * (std::f64::consts::PI * (u - 0.5)).tan(), w)
            })
            .collect();
        Self::new(atoms)
    }

    /// Uniform midpoint grid on [center - radius, center + radius] with exact
    /// cell masses, renormalized to total weight one. The truncated tail mass
    /// (about gamma / (pi * radius)) bounds the systematic error, which is why
    /// the radius is a user-visible parameter.
    pub fn cauchy_grid(center: f64, gamma: f64, n: usize, radius: f64) -> Result<Self> {
        if n == 0 || gamma <= 0.0 || radius <= 0.0 {
            return Err(Error::Model("cauchy grid needs n > 0, gamma > 0, radius > 0".into()));
        }
        let cdf = |x: f64| (2.0 * (x - center) / gamma).atan() / std::f64::consts::PI;
        let mut atoms = Vec::with_capacity(n);
        let mut total = 0.0;
        for a in 0..n {
            let lo = center - radius + 2.0 * radius * a as f64 / n as f64;
            let hi = center - radius + 2.0 * radius * (a as f64 + 1.0) / n as f64;
            let w = cdf(hi) - cdf(lo);
            total += w;
            atoms.push((0.5 * (lo + hi), w));
        }
        for atom in &mut atoms {
            atom.1 /= total;
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Real level functions h_j applied to the common bath operator in the
/// commuting construction H_j = h_j(H).
#[derive(Debug, Clone)]
pub enum LevelFunction {
    /// h(x) = slope * x
    Linear { slope: f64 },
    /// h(x) = max(0, x)
    SplitPositive,
    /// h(x) = -min(0, x)
    SplitNegative,
    /// Piecewise-linear interpolation through (x, h(x)) nodes sorted by x;
    /// clamped to the boundary values outside the node range.
    Tabulated { nodes: Vec<(f64, f64)> },
}

impl LevelFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LevelFunction::Linear { slope } => slope * x,
            LevelFunction::SplitPositive => x.max(0.0),
            LevelFunction::SplitNegative => -x.min(0.0),
            LevelFunction::Tabulated { nodes } => {
                if nodes.is_empty() {
                    return 0.0;
                }
                if x <= nodes[0].0 {
                    return nodes[0].1;
                }
                if x >= nodes[nodes.len() - 1].0 {
                    return nodes[nodes.len() - 1].1;
                }
                let k = nodes.partition_point(|&(nx, _)| nx <= x);
                let (x0, y0) = nodes[k - 1];
                let (x1, y1) = nodes[k];
                if x1 == x0 {
                    y0
                } else {
                    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
                }
            }
        }
    }
}

/// Dephasing matrix of the commuting construction: the discretized Fourier
/// transform phi_{jl}(t) = sum_a w_a exp(-it (h_j(x_a) - h_l(x_a))).
pub fn commuting_dephasing(
    measure: &SpectralMeasure,
    h_funcs: &[LevelFunction],
    t: f64,
) -> Result<DephasingMatrix> {
    let d = h_funcs.len();
    if d < 2 {
        return Err(Error::Model("need at least two level functions".into()));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::Model(format!("time must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(DephasingMatrix::all_ones(d));
    }
    let mut phi = CMat::from_element(d, d, c(1.0, 0.0));
    for j in 0..d {
        for l in (j + 1)..d {
            let mut acc = linalg::KahanComplex::default();
            for &(x, w) in measure.atoms() {
                let gap = h_funcs[j].eval(x) - h_funcs[l].eval(x);
                acc.add(Complex64::from_polar(w, -t * gap));
            }
            phi[(j, l)] = acc.value();
            phi[(l, j)] = acc.value().conj();
        }
    }
    DephasingMatrix::new(phi, t)
}

/// Provenance tag for a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectorySource {
    FiniteModel,
    Analytic,
    SpinBoson,
}

/// Dephasing matrices sampled on a strictly increasing grid starting at 0.
#[derive(Debug, Clone)]
pub struct DephasingTrajectory {
    times: Vec<f64>,
    matrices: Vec<DephasingMatrix>,
    source: TrajectorySource,
}

impl DephasingTrajectory {
    pub fn from_matrices(matrices: Vec<DephasingMatrix>, source: TrajectorySource) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Model("trajectory needs at least one sample".into()));
        }
        let d = matrices[0].dim();
        if matrices.iter().any(|m| m.dim() != d) {
            return Err(Error::Model("trajectory samples have mixed dimensions".into()));
        }
        let times: Vec<f64> = matrices.iter().map(|m| m.t()).collect();
        if times[0] != 0.0 {
            return Err(Error::Model(format!("trajectory must start at t = 0, got {}", times[0])));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Model(format!(
                    "trajectory grid must be strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let ones = DephasingMatrix::all_ones(d);
        if linalg::max_abs_diff(matrices[0].matrix(), ones.matrix()) > STATE_TOL {
            return Err(Error::Model("trajectory must start at the all-ones matrix".into()));
        }
        Ok(Self { times, matrices, source })
    }

    pub fn from_model(model: &BlockModel, times: &[f64]) -> Result<Self> {
        let matrices = times
            .iter()
            .map(|&t| model.dephasing_matrix(t))
            .collect::<Result<Vec<_>>>()?;
        Self::from_matrices(matrices, TrajectorySource::FiniteModel)
    }

    pub fn from_measure(
        measure: &SpectralMeasure,
        h_funcs: &[LevelFunction],
        times: &[f64],
    ) -> Result<Self> {
        let matrices = times
            .iter()
            .map(|&t| commuting_dephasing(measure, h_funcs, t))
            .collect::<Result<Vec<_>>>()?;
        Self::from_matrices(matrices, TrajectorySource::Analytic)
    }

    /// Build from an explicit matrix-valued function of time; each sample is
    /// validated like any other dephasing matrix.
    pub fn from_fn<F: Fn(f64) -> CMat>(
        times: &[f64],
        f: F,
        source: TrajectorySource,
    ) -> Result<Self> {
        let matrices = times
            .iter()
            .map(|&t| DephasingMatrix::new(f(t), t))
            .collect::<Result<Vec<_>>>()?;
        Self::from_matrices(matrices, source)
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn matrix(&self, k: usize) -> &DephasingMatrix {
        &self.matrices[k]
    }

    pub fn matrices(&self) -> &[DephasingMatrix] {
        &self.matrices
    }

    pub fn source(&self) -> TrajectorySource {
        self.source
    }
}

/// Evenly spaced grid 0, step, 2 step, ..., stop (inclusive up to rounding).
pub fn uniform_grid(stop: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| stop * k as f64 / steps as f64).collect()
}
