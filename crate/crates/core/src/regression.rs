//! The multi-time regression hierarchy.
//!
//! For block models the regression property reduces to a family of scalar
//! conditions: the time-ordered bath trace over every index tuple must equal
//! the product of single-interval dephasing traces. This module enumerates
//! those conditions, evaluates both sides, and also exposes the intervention
//! picture (full system-bath evolution alternated with local operators)
//! together with its tuple-expansion reconstruction.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{BlockModel, QuditState, SpectralMeasure, LevelFunction};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Ordered sampling times t_0 <= t_1 <= ... <= t_n (all nonnegative).
/// The number of intervals equals the number of points; the first increment
/// is measured from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Model("time grid must not be empty".into()));
        }
        let mut prev = 0.0;
        for &p in &points {
            if !p.is_finite() || p < prev {
                return Err(Error::Model(format!(
                    "time grid must be ordered and nonnegative, got {points:?}"
                )));
            }
            prev = p;
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of intervals (grid points, counting the implicit start at 0).
    pub fn intervals(&self) -> usize {
        self.points.len()
    }

    /// Delta t_0 = t_0, Delta t_k = t_k - t_{k-1}.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.points
            .iter()
            .map(|&p| {
                let dt = p - prev;
                prev = p;
                dt
            })
            .collect()
    }
}

/// One (j_k, l_k) pair per interval.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexTuple {
    pairs: Vec<(usize, usize)>,
}

impl IndexTuple {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Swap every (j, l) -> (l, j); conjugates both sides of the condition.
    pub fn conjugate(&self) -> Self {
        Self { pairs: self.pairs.iter().map(|&(j, l)| (l, j)).collect() }
    }

    pub fn is_all_diagonal(&self) -> bool {
        self.pairs.iter().all(|&(j, l)| j == l)
    }

    /// A trailing diagonal pair cancels by cyclicity of the trace, reducing
    /// the condition to one with fewer intervals; such tuples are duplicates
    /// of shorter conditions.
    pub fn has_trailing_diagonal(&self) -> bool {
        self.pairs.last().is_some_and(|&(j, l)| j == l)
    }
}

/// All index tuples for `intervals` pairs over a d-level system, in
/// lexicographic order of the flattened digits (j_0, l_0, j_1, l_1, ...).
pub fn enumerate_tuples(d: usize, intervals: usize) -> Vec<IndexTuple> {
    let digits = 2 * intervals;
    let total = d.pow(digits as u32);
    let mut out = Vec::with_capacity(total);
    let mut counter = vec![0usize; digits];
    for _ in 0..total {
        let pairs = counter.chunks(2).map(|p| (p[0], p[1])).collect();
        out.push(IndexTuple::new(pairs));
        for slot in (0..digits).rev() {
            counter[slot] += 1;
            if counter[slot] < d {
                break;
            }
            counter[slot] = 0;
        }
    }
    out
}

/// Anything that can evaluate single-interval dephasing traces and the
/// time-ordered multi-interval traces: finite block models by brute force,
/// commuting spectral-measure models by atomic sums, and flat-coupling boson
/// models through their closed-form Weyl expressions.
pub trait MultiTimeModel {
    fn dim(&self) -> usize;

    /// phi_{jl}(dt) = tr[exp(-i dt H_j) rho_B exp(i dt H_l)].
    fn single_interval(&self, j: usize, l: usize, dt: f64) -> Result<Complex64>;

    /// tr[exp(-i dt_n H_{j_n}) ... exp(-i dt_0 H_{j_0}) rho_B
    ///    exp(i dt_0 H_{l_0}) ... exp(i dt_n H_{l_n})].
    fn multi_interval(&self, increments: &[f64], tuple: &IndexTuple) -> Result<Complex64>;

    /// The dephasing matrix over one increment, with exact unit diagonal.
    fn dephasing(&self, dt: f64) -> Result<CMat> {
        let d = self.dim();
        let mut phi = CMat::from_element(d, d, c(1.0, 0.0));
        for j in 0..d {
            for l in 0..d {
                if j != l {
                    phi[(j, l)] = self.single_interval(j, l, dt)?;
                }
            }
        }
        Ok(phi)
    }
}

impl MultiTimeModel for BlockModel {
    fn dim(&self) -> usize {
        BlockModel::dim(self)
    }

    fn single_interval(&self, j: usize, l: usize, dt: f64) -> Result<Complex64> {
        // same code path as the single-pair multi-interval trace, so the
        // one-interval regression conditions are identities by construction
        self.multi_interval(&[dt], &IndexTuple::new(vec![(j, l)]))
    }

    fn multi_interval(&self, increments: &[f64], tuple: &IndexTuple) -> Result<Complex64> {
        if increments.len() != tuple.len() {
            return Err(Error::Model(format!(
                "tuple length {} does not match interval count {}",
                tuple.len(),
                increments.len()
            )));
        }
        let d = self.dim();
        let mut cache: HashMap<(usize, u64), CMat> = HashMap::new();
        let mut state = self.bath_state().clone();
        for (&dt, &(j, l)) in increments.iter().zip(tuple.pairs()) {
            if j >= d || l >= d {
                return Err(Error::Model(format!("tuple index out of range for d = {d}")));
            }
            if dt < 0.0 {
                return Err(Error::Model(format!("negative increment {dt}")));
            }
            let key_bits = dt.to_bits();
            for idx in [j, l] {
                if let std::collections::hash_map::Entry::Vacant(slot) =
                    cache.entry((idx, key_bits))
                {
                    slot.insert(self.block(idx).evolution(dt)?);
                }
            }
            let uj = &cache[&(j, key_bits)];
            let ul = &cache[&(l, key_bits)];
            state = uj * state * ul.adjoint();
        }
        Ok(state.trace())
    }
}

/// Commuting-blocks model realized by a spectral measure and level functions
/// h_j: the blocks are diagonal in the measure basis, so every multi-time
/// trace is an atomic sum of pure phases.
#[derive(Debug, Clone)]
pub struct CommutingModel {
    measure: SpectralMeasure,
    levels: Vec<Vec<f64>>,
}

impl CommutingModel {
    pub fn new(measure: SpectralMeasure, h_funcs: &[LevelFunction]) -> Result<Self> {
        if h_funcs.len() < 2 {
            return Err(Error::Model("need at least two level functions".into()));
        }
        let levels = h_funcs
            .iter()
            .map(|h| measure.atoms().iter().map(|&(x, _)| h.eval(x)).collect())
            .collect();
        Ok(Self { measure, levels })
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.measure
    }
}

impl MultiTimeModel for CommutingModel {
    fn dim(&self) -> usize {
        self.levels.len()
    }

    fn single_interval(&self, j: usize, l: usize, dt: f64) -> Result<Complex64> {
        self.multi_interval(&[dt], &IndexTuple::new(vec![(j, l)]))
    }

    fn multi_interval(&self, increments: &[f64], tuple: &IndexTuple) -> Result<Complex64> {
        if increments.len() != tuple.len() {
            return Err(Error::Model("tuple/grid length mismatch".into()));
        }
        let d = self.dim();
        for &(j, l) in tuple.pairs() {
            if j >= d || l >= d {
                return Err(Error::Model(format!("tuple index out of range for d = {d}")));
            }
        }
        let mut acc = linalg::KahanComplex::default();
        for (a, &(_, w)) in self.measure.atoms().iter().enumerate() {
            let mut phase = 0.0;
            for (&dt, &(j, l)) in increments.iter().zip(tuple.pairs()) {
                phase -= dt * (self.levels[j][a] - self.levels[l][a]);
            }
            acc.add(Complex64::from_polar(w, phase));
        }
        Ok(acc.value())
    }
}

pub fn regression_lhs<M: MultiTimeModel>(
    model: &M,
    grid: &TimeGrid,
    tuple: &IndexTuple,
) -> Result<Complex64> {
    model.multi_interval(&grid.increments(), tuple)
}

pub fn regression_rhs<M: MultiTimeModel>(
    model: &M,
    grid: &TimeGrid,
    tuple: &IndexTuple,
) -> Result<Complex64> {
    if grid.intervals() != tuple.len() {
        return Err(Error::Model("tuple/grid length mismatch".into()));
    }
    let mut acc = c(1.0, 0.0);
    for (&dt, &(j, l)) in grid.increments().iter().zip(tuple.pairs()) {
        if j == l {
            continue; // phi_jj = 1 exactly
        }
        acc *= model.single_interval(j, l, dt)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct HierarchyOptions {
    pub tol: f64,
    /// Cap on the total number of tuple evaluations across all grids.
    pub budget: usize,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        Self { tol: 1e-10, budget: 1_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct ConditionRow {
    pub grid_index: usize,
    pub tuple: IndexTuple,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub modulus_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RegressionReport {
    pub rows: Vec<ConditionRow>,
    /// Tuples enumerated before deduplication, summed over grids.
    pub enumerated: usize,
    /// Rows actually evaluated after dropping trivial and conjugate tuples.
    pub evaluated: usize,
    pub max_residual: f64,
    pub max_modulus_residual: f64,
    pub satisfied: bool,
    pub tol: f64,
    /// Seed used to draw the grids, when they were sampled randomly.
    pub seed: Option<u64>,
}

/// Keep one representative per nontrivial condition: drop all-diagonal
/// tuples, tuples whose trailing pair is diagonal (duplicates of shorter
/// conditions), and the lexicographically larger member of each conjugate
/// pair. At d = 2 with two intervals this reduces the 16 raw tuples to the
/// four independent constraints.
fn keep_tuple(t: &IndexTuple) -> bool {
    if t.is_all_diagonal() || t.has_trailing_diagonal() {
        return false;
    }
    let conj = t.conjugate();
    *t <= conj
}

pub fn check_hierarchy<M: MultiTimeModel>(
    model: &M,
    max_intervals: usize,
    grids: &[TimeGrid],
    opts: &HierarchyOptions,
) -> Result<RegressionReport> {
    let d = model.dim();
    let mut required = 0usize;
    for grid in grids {
        if grid.intervals() > max_intervals {
            return Err(Error::Model(format!(
                "grid has {} intervals, exceeding the requested maximum {max_intervals}",
                grid.intervals()
            )));
        }
        let count = d
            .checked_pow(2 * grid.intervals() as u32)
            .ok_or(Error::Budget { required: usize::MAX, limit: opts.budget })?;
        required = required
            .checked_add(count)
            .ok_or(Error::Budget { required: usize::MAX, limit: opts.budget })?;
    }
    if required > opts.budget {
        return Err(Error::Budget { required, limit: opts.budget });
    }

    let mut rows = Vec::new();
    let mut max_residual = 0.0f64;
    let mut max_modulus_residual = 0.0f64;
    for (grid_index, grid) in grids.iter().enumerate() {
        let increments = grid.increments();
        for tuple in enumerate_tuples(d, grid.intervals()) {
            if !keep_tuple(&tuple) {
                continue;
            }
            let lhs = model.multi_interval(&increments, &tuple)?;
            let rhs = regression_rhs(model, grid, &tuple)?;
            let residual = (lhs - rhs).norm();
            let modulus_residual = (lhs.norm() - rhs.norm()).abs();
            max_residual = max_residual.max(residual);
            max_modulus_residual = max_modulus_residual.max(modulus_residual);
            rows.push(ConditionRow { grid_index, tuple, lhs, rhs, residual, modulus_residual });
        }
    }
    let evaluated = rows.len();
    Ok(RegressionReport {
        rows,
        enumerated: required,
        evaluated,
        max_residual,
        max_modulus_residual,
        satisfied: max_residual < opts.tol,
        tol: opts.tol,
        seed: None,
    })
}

/// `check_hierarchy` over seeded random grids; the seed is recorded in the
/// report for reproducibility.
#[allow(clippy::too_many_arguments)]
pub fn check_hierarchy_random<M: MultiTimeModel>(
    model: &M,
    max_intervals: usize,
    grids_per_depth: usize,
    increment_range: (f64, f64),
    seed: u64,
    opts: &HierarchyOptions,
) -> Result<RegressionReport> {
    let mut grids = Vec::new();
    for m in 2..=max_intervals {
        grids.extend(crate::sampling::random_grids(
            seed.wrapping_add(m as u64),
            grids_per_depth,
            m,
            increment_range.0,
            increment_range.1,
        ));
    }
    let mut report = check_hierarchy(model, max_intervals, &grids, opts)?;
    report.seed = Some(seed);
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct NamedCondition {
    pub label: &'static str,
    pub tuple: IndexTuple,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// The four independent two-interval constraints of the qubit hierarchy, in
/// display order. The first one is the semigroup defect
/// |phi(t1) - phi(t1 - t0) phi(t0)|.
pub fn n2_named_conditions<M: MultiTimeModel>(
    model: &M,
    t0: f64,
    t1: f64,
) -> Result<[NamedCondition; 4]> {
    if model.dim() != 2 {
        return Err(Error::Model("the named two-interval conditions are qubit-specific".into()));
    }
    if t0.is_nan() || t1.is_nan() || t0 < 0.0 || t1 < t0 {
        return Err(Error::Model(format!("need t1 >= t0 >= 0, got t0 = {t0}, t1 = {t1}")));
    }
    let grid = TimeGrid::new(vec![t0, t1])?;
    let specs: [(&'static str, [(usize, usize); 2]); 4] = [
        ("semigroup", [(0, 1), (0, 1)]),
        ("echo", [(1, 0), (0, 1)]),
        ("mixed-0", [(0, 0), (0, 1)]),
        ("mixed-1", [(1, 1), (1, 0)]),
    ];
    let mut out = Vec::with_capacity(4);
    for (label, pairs) in specs {
        let tuple = IndexTuple::new(pairs.to_vec());
        let lhs = regression_lhs(model, &grid, &tuple)?;
        let rhs = regression_rhs(model, &grid, &tuple)?;
        out.push(NamedCondition { label, tuple, lhs, rhs, residual: (lhs - rhs).norm() });
    }
    Ok(out.try_into().expect("four conditions"))
}

/// A pair of operators applied as X (.) Y at one intervention time.
#[derive(Debug, Clone)]
pub struct Intervention {
    pub left: CMat,
    pub right: CMat,
}

impl Intervention {
    pub fn identity(d: usize) -> Self {
        Self { left: linalg::identity(d), right: linalg::identity(d) }
    }

    /// Unitary conjugation u (.) u^dag.
    pub fn unitary(u: &CMat) -> Self {
        Self { left: u.clone(), right: u.adjoint() }
    }

    /// The qubit swap sigma_x (.) sigma_x.
    pub fn pauli_x_swap() -> Self {
        let sx = CMat::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        );
        Self::unitary(&sx)
    }

    /// Identity on the left, `o` on the right: the final trace becomes the
    /// expectation value tr[o rho].
    pub fn observable(o: CMat) -> Self {
        let d = o.nrows();
        Self { left: linalg::identity(d), right: o }
    }

    /// The default qubit intervention set: unitary conjugations by the
    /// identity and the three Pauli matrices.
    pub fn pauli_basis() -> Vec<Self> {
        let sx = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let sy =
            CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let sz =
            CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        vec![
            Intervention::identity(2),
            Intervention::unitary(&sx),
            Intervention::unitary(&sy),
            Intervention::unitary(&sz),
        ]
    }

    pub fn dim(&self) -> usize {
        self.left.nrows()
    }
}

/// Full system-bath evolution alternated with local interventions
/// (X_k (x) 1) . (Y_k (x) 1), followed by the total trace.
pub fn intervention_lhs(
    model: &BlockModel,
    rho: &QuditState,
    grid: &TimeGrid,
    interventions: &[Intervention],
) -> Result<Complex64> {
    let d = model.dim();
    let db = model.bath_dim();
    if rho.dim() != d {
        return Err(Error::Model("state dimension does not match the model".into()));
    }
    if interventions.len() != grid.intervals() {
        return Err(Error::Model(format!(
            "{} interventions for {} grid points",
            interventions.len(),
            grid.intervals()
        )));
    }
    if interventions.iter().any(|i| i.left.nrows() != d || i.right.nrows() != d) {
        return Err(Error::Model("intervention dimension does not match the model".into()));
    }
    let full_h = model.full_hamiltonian();
    let identity_bath = linalg::identity(db);
    let mut state = linalg::kronecker(rho.matrix(), model.bath_state());
    for (&dt, step) in grid.increments().iter().zip(interventions) {
        let u = linalg::herm_exp(&full_h, dt)?;
        state = &u * state * u.adjoint();
        let xl = linalg::kronecker(&step.left, &identity_bath);
        let yr = linalg::kronecker(&step.right, &identity_bath);
        state = xl * state * yr;
    }
    Ok(state.trace())
}

/// Reduced-dynamics prediction for the same intervention sequence: Hadamard
/// channels over each increment alternated with X_k (.) Y_k.
pub fn intervention_rhs<M: MultiTimeModel>(
    model: &M,
    rho: &QuditState,
    grid: &TimeGrid,
    interventions: &[Intervention],
) -> Result<Complex64> {
    let d = model.dim();
    if rho.dim() != d {
        return Err(Error::Model("state dimension does not match the model".into()));
    }
    if interventions.len() != grid.intervals() {
        return Err(Error::Model(format!(
            "{} interventions for {} grid points",
            interventions.len(),
            grid.intervals()
        )));
    }
    if interventions.iter().any(|i| i.left.nrows() != d || i.right.nrows() != d) {
        return Err(Error::Model("intervention dimension does not match the model".into()));
    }
    let mut state = rho.matrix().clone();
    for (&dt, step) in grid.increments().iter().zip(interventions) {
        let phi = model.dephasing(dt)?;
        for j in 0..d {
            for l in 0..d {
                state[(j, l)] *= phi[(j, l)];
            }
        }
        state = &step.left * state * &step.right;
    }
    Ok(state.trace())
}

/// Reconstruction of `intervention_lhs` from the tuple expansion: the sum
/// over index tuples of the system matrix-element chain times the bath
/// multi-interval trace. Serves as the independent oracle for the
/// equivalence between the intervention picture and the scalar hierarchy.
pub fn intervention_lhs_expansion(
    model: &BlockModel,
    rho: &QuditState,
    grid: &TimeGrid,
    interventions: &[Intervention],
) -> Result<Complex64> {
    let d = model.dim();
    if rho.dim() != d {
        return Err(Error::Model("state dimension does not match the model".into()));
    }
    let m = grid.intervals();
    if interventions.len() != m {
        return Err(Error::Model("intervention count must match the grid".into()));
    }
    let increments = grid.increments();
    // cache the bath evolutions per (level, interval)
    let mut evolutions: Vec<Vec<CMat>> = Vec::with_capacity(m);
    for &dt in &increments {
        let per_level = (0..d)
            .map(|j| model.block(j).evolution(dt))
            .collect::<Result<Vec<_>>>()?;
        evolutions.push(per_level);
    }
    let mut total = c(0.0, 0.0);
    for tuple in enumerate_tuples(d, m) {
        let pairs = tuple.pairs();
        // system chain: <j_k|X_{k-1}|j_{k-1}>, rho_{j_0 l_0},
        // <l_{k-1}|Y_{k-1}|l_k>, and the closing <l_n|Y_n X_n|j_n>
        let mut chain = rho.matrix()[(pairs[0].0, pairs[0].1)];
        for k in 1..m {
            chain *= interventions[k - 1].left[(pairs[k].0, pairs[k - 1].0)];
            chain *= interventions[k - 1].right[(pairs[k - 1].1, pairs[k].1)];
        }
        let (jn, ln) = pairs[m - 1];
        let closing = (&interventions[m - 1].right * &interventions[m - 1].left)[(ln, jn)];
        chain *= closing;
        if chain.norm() == 0.0 {
            continue;
        }
        let mut bath = model.bath_state().clone();
        for (k, &(j, l)) in pairs.iter().enumerate() {
            bath = &evolutions[k][j] * bath * evolutions[k][l].adjoint();
        }
        total += chain * bath.trace();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    #[test]
    fn grid_increments() {
        let g = TimeGrid::new(vec![0.5, 1.25, 3.0]).unwrap();
        let inc = g.increments();
        assert_eq!(inc, vec![0.5, 0.75, 1.75]);
        assert!(TimeGrid::new(vec![1.0, 0.5]).is_err());
        assert!(TimeGrid::new(vec![-0.1]).is_err());
    }

    #[test]
    fn tuple_enumeration_is_lexicographic() {
        let tuples = enumerate_tuples(2, 1);
        let flat: Vec<_> = tuples.iter().map(|t| t.pairs()[0]).collect();
        assert_eq!(flat, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(enumerate_tuples(3, 2).len(), 81);
    }

    #[test]
    fn dedup_reduces_sixteen_to_four() {
        let kept: Vec<_> = enumerate_tuples(2, 2).into_iter().filter(keep_tuple).collect();
        assert_eq!(kept.len(), 4);
        let expected = [
            vec![(0, 0), (0, 1)],
            vec![(0, 1), (0, 1)],
            vec![(0, 1), (1, 0)],
            vec![(1, 1), (0, 1)],
        ];
        for (k, e) in kept.iter().zip(expected.iter()) {
            assert_eq!(k.pairs(), e.as_slice());
        }
    }

    #[test]
    fn diagonal_tuples_give_unity() {
        let model = sampling::random_block_model(2, 3, 11);
        let grid = TimeGrid::new(vec![0.7, 1.9]).unwrap();
        let tuple = IndexTuple::new(vec![(1, 1), (0, 0)]);
        let lhs = regression_lhs(&model, &grid, &tuple).unwrap();
        assert!((lhs - c(1.0, 0.0)).norm() < 1e-13);
        let rhs = regression_rhs(&model, &grid, &tuple).unwrap();
        assert_eq!(rhs, c(1.0, 0.0));
    }

    #[test]
    fn zero_length_grid_gives_unity() {
        let model = sampling::random_block_model(2, 3, 17);
        let grid = TimeGrid::new(vec![0.0, 0.0]).unwrap();
        let tuple = IndexTuple::new(vec![(0, 1), (1, 0)]);
        let lhs = regression_lhs(&model, &grid, &tuple).unwrap();
        let rhs = regression_rhs(&model, &grid, &tuple).unwrap();
        assert!((lhs - c(1.0, 0.0)).norm() < 1e-13);
        assert!((rhs - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn single_interval_condition_is_an_identity() {
        let model = sampling::random_block_model(2, 3, 5);
        let grid = TimeGrid::new(vec![1.3]).unwrap();
        let tuple = IndexTuple::new(vec![(0, 1)]);
        let lhs = regression_lhs(&model, &grid, &tuple).unwrap();
        let rhs = regression_rhs(&model, &grid, &tuple).unwrap();
        assert_eq!(lhs, rhs); // same code path by construction
    }

    #[test]
    fn two_interval_trace_matches_projector_interventions() {
        // The full-space path with projector interventions isolates a single
        // tuple: d * intervention_lhs equals the bath-block product trace.
        let model = sampling::random_block_model(2, 3, 42);
        let rho = QuditState::maximally_coherent(2);
        let grid = TimeGrid::new(vec![0.6, 1.4]).unwrap();
        let (j0, l0, j1, l1) = (0usize, 1usize, 1usize, 0usize);
        let mut x0 = CMat::zeros(2, 2);
        x0[(j1, j0)] = c(1.0, 0.0);
        let mut y0 = CMat::zeros(2, 2);
        y0[(l0, l1)] = c(1.0, 0.0);
        let mut y1 = CMat::zeros(2, 2);
        y1[(l1, j1)] = c(1.0, 0.0);
        let steps = vec![
            Intervention { left: x0, right: y0 },
            Intervention { left: linalg::identity(2), right: y1 },
        ];
        let via_full = intervention_lhs(&model, &rho, &grid, &steps).unwrap();
        let tuple = IndexTuple::new(vec![(j0, l0), (j1, l1)]);
        let via_blocks = regression_lhs(&model, &grid, &tuple).unwrap();
        assert!(
            (via_full * c(2.0, 0.0) - via_blocks).norm() < 1e-12,
            "full {via_full}, blocks {via_blocks}"
        );
    }

    #[test]
    fn expansion_reconstructs_interventions() {
        for seed in 0..6 {
            let model = sampling::random_block_model(2, 3, 100 + seed);
            let rho = sampling::random_qudit_state(2, 200 + seed);
            let grid = TimeGrid::new(vec![0.4, 1.1]).unwrap();
            let mut r = sampling::rng(300 + seed);
            let steps = vec![
                sampling::random_intervention(2, &mut r),
                sampling::random_intervention(2, &mut r),
            ];
            let direct = intervention_lhs(&model, &rho, &grid, &steps).unwrap();
            let expanded = intervention_lhs_expansion(&model, &rho, &grid, &steps).unwrap();
            assert!(
                (direct - expanded).norm() < 1e-10,
                "seed {seed}: {direct} vs {expanded}"
            );
        }
    }

    #[test]
    fn identity_interventions_preserve_trace() {
        let model = sampling::random_block_model(3, 2, 7);
        let rho = sampling::random_qudit_state(3, 8);
        let grid = TimeGrid::new(vec![0.5, 1.0, 2.0]).unwrap();
        let steps = vec![Intervention::identity(3); 3];
        let lhs = intervention_lhs(&model, &rho, &grid, &steps).unwrap();
        assert!((lhs - c(1.0, 0.0)).norm() < 1e-12);
        let rhs = intervention_rhs(&model, &rho, &grid, &steps).unwrap();
        assert!((rhs - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn commuting_model_two_atom_residual() {
        // atoms at +-1/2, h_0 - h_1 = x: phi(t) = cos(t/2). On the grid
        // (t, 2t) the echo tuple gives lhs = 1, rhs = |phi(t)|^2.
        let measure = SpectralMeasure::new(vec![(-0.5, 0.5), (0.5, 0.5)]).unwrap();
        let h = vec![
            LevelFunction::Linear { slope: 0.5 },
            LevelFunction::Linear { slope: -0.5 },
        ];
        let model = CommutingModel::new(measure, &h).unwrap();
        let t0 = 1.0;
        let grid = TimeGrid::new(vec![t0, 2.0 * t0]).unwrap();
        let tuple = IndexTuple::new(vec![(1, 0), (0, 1)]);
        let lhs = regression_lhs(&model, &grid, &tuple).unwrap();
        let rhs = regression_rhs(&model, &grid, &tuple).unwrap();
        assert!((lhs - c(1.0, 0.0)).norm() < 1e-14);
        let phi = (0.5f64).cos();
        assert!(((lhs - rhs).norm() - (1.0 - phi * phi)).abs() < 1e-13);
    }

    #[test]
    fn trivial_model_satisfies_hierarchy() {
        // identical blocks: every dephasing function is 1
        let h = sampling::random_hermitian(3, 1.0, &mut sampling::rng(3));
        let bath = sampling::random_density(3, &mut sampling::rng(4));
        let model = BlockModel::new(vec![h.clone(), h], bath).unwrap();
        let grids = vec![TimeGrid::new(vec![0.8, 1.6]).unwrap()];
        let report = check_hierarchy(&model, 2, &grids, &HierarchyOptions::default()).unwrap();
        assert!(report.satisfied, "max residual {}", report.max_residual);
        assert_eq!(report.enumerated, 16);
        assert_eq!(report.evaluated, 4);
    }

    #[test]
    fn noncommuting_model_violates_hierarchy() {
        let model = sampling::random_block_model(2, 3, 77);
        let grids = vec![TimeGrid::new(vec![0.9, 1.7]).unwrap()];
        let report = check_hierarchy(&model, 2, &grids, &HierarchyOptions::default()).unwrap();
        assert!(!report.satisfied);
        assert!(report.max_residual > 1e-4, "max residual {}", report.max_residual);
    }

    #[test]
    fn conjugation_symmetry() {
        let model = sampling::random_block_model(2, 4, 13);
        let grid = TimeGrid::new(vec![0.5, 1.2]).unwrap();
        let tuple = IndexTuple::new(vec![(0, 1), (1, 0)]);
        let conj = tuple.conjugate();
        let lhs = regression_lhs(&model, &grid, &tuple).unwrap();
        let lhs_c = regression_lhs(&model, &grid, &conj).unwrap();
        assert!((lhs - lhs_c.conj()).norm() < 1e-13);
        let rhs = regression_rhs(&model, &grid, &tuple).unwrap();
        let rhs_c = regression_rhs(&model, &grid, &conj).unwrap();
        assert!((rhs - rhs_c.conj()).norm() < 1e-13);
    }

    #[test]
    fn swap_intervention_reveals_the_echo() {
        // shallow pocket at finite discretization: H_0 = -H_1 = diag(x)/2 on
        // 64 Cauchy quantile atoms. The swap at t_0 makes the full dynamics
        // re-cohere completely, while the reduced channel keeps dephasing:
        // the sigma_x witness at t_1 = 2 t_0 differs by about 1 - e^{-t_0}.
        let n = 64;
        let measure = SpectralMeasure::cauchy_quantile(0.0, 1.0, n).unwrap();
        let mut h0 = CMat::zeros(n, n);
        let mut bath = CMat::zeros(n, n);
        for (a, &(x, w)) in measure.atoms().iter().enumerate() {
            h0[(a, a)] = c(0.5 * x, 0.0);
            bath[(a, a)] = c(w, 0.0);
        }
        let h1 = -h0.clone();
        let model = BlockModel::new(
            vec![
                crate::model::HermitianMatrix::new(h0).unwrap(),
                crate::model::HermitianMatrix::new(h1).unwrap(),
            ],
            bath,
        )
        .unwrap();
        let t0 = 1.0;
        let grid = TimeGrid::new(vec![t0, 2.0 * t0]).unwrap();
        let rho = QuditState::maximally_coherent(2);
        let sx = CMat::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        );
        let steps = vec![Intervention::pauli_x_swap(), Intervention::observable(sx)];
        let lhs = intervention_lhs(&model, &rho, &grid, &steps).unwrap();
        let rhs = intervention_rhs(&model, &rho, &grid, &steps).unwrap();
        // the echo restores full coherence on the exact dynamics
        assert!((lhs - c(1.0, 0.0)).norm() < 1e-12, "echo lhs {lhs}");
        let gap = (lhs - rhs).norm();
        let expected = 1.0 - (-t0).exp();
        // the 64-atom discretization carries a percent-level error
        assert!((gap - expected).abs() < 0.05, "gap {gap} vs 1 - e^-1 = {expected}");
    }

    #[test]
    fn pauli_interventions_agree_for_trivial_models() {
        // identical blocks satisfy regression, so the full and reduced
        // pictures agree for every intervention sequence
        let h = sampling::random_hermitian(3, 1.0, &mut sampling::rng(31));
        let bath = sampling::random_density(3, &mut sampling::rng(32));
        let model = BlockModel::new(vec![h.clone(), h], bath).unwrap();
        let rho = sampling::random_qudit_state(2, 33);
        let grid = TimeGrid::new(vec![0.5, 1.3]).unwrap();
        for first in Intervention::pauli_basis() {
            for second in Intervention::pauli_basis() {
                let steps = vec![first.clone(), second.clone()];
                let lhs = intervention_lhs(&model, &rho, &grid, &steps).unwrap();
                let rhs = intervention_rhs(&model, &rho, &grid, &steps).unwrap();
                assert!((lhs - rhs).norm() < 1e-11, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn budget_guard_triggers() {
        let model = sampling::random_block_model(3, 2, 1);
        let grids = vec![TimeGrid::new((1..=7).map(|k| k as f64).collect()).unwrap()];
        let err = check_hierarchy(&model, 7, &grids, &HierarchyOptions::default());
        assert!(matches!(err, Err(Error::Budget { .. })));
    }

    #[test]
    fn named_conditions_on_degenerate_grid() {
        let model = sampling::random_block_model(2, 3, 21);
        let conds = n2_named_conditions(&model, 0.0, 0.0).unwrap();
        for cond in &conds {
            assert!(cond.residual < 1e-13, "{}: {}", cond.label, cond.residual);
        }
    }

    #[test]
    fn named_condition_two_matches_commuting_specialization() {
        let measure = SpectralMeasure::new(vec![(-0.5, 0.5), (0.5, 0.5)]).unwrap();
        let h = vec![
            LevelFunction::Linear { slope: 0.5 },
            LevelFunction::Linear { slope: -0.5 },
        ];
        let model = CommutingModel::new(measure, &h).unwrap();
        let t0 = 0.8;
        let conds = n2_named_conditions(&model, t0, 2.0 * t0).unwrap();
        let phi = (0.5 * t0).cos();
        assert!((conds[1].residual - (1.0 - phi * phi)).abs() < 1e-13);
    }
}
