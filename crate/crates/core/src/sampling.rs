//! Deterministic seeded sampling of models, states, grids, and interventions.
//!
//! Everything here is driven by explicit seeds (ChaCha8) so that sweeps and
//! reports are reproducible run to run and across platforms.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::CMat;
use crate::model::{BlockModel, HermitianMatrix, QuditState};
use crate::regression::{Intervention, TimeGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_complex_matrix(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(dim, dim, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let g = random_complex_matrix(dim, rng);
    let h = (&g + g.adjoint()) * c(0.5 * scale, 0.0);
    HermitianMatrix::new(h).expect("symmetrized matrix is Hermitian")
}

pub fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = random_complex_matrix(dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m * c(1.0 / tr, 0.0)
}

pub fn random_block_model(d: usize, d_bath: usize, seed: u64) -> BlockModel {
    let mut r = rng(seed);
    let blocks = (0..d).map(|_| random_hermitian(d_bath, 1.0, &mut r)).collect();
    let bath = random_density(d_bath, &mut r);
    BlockModel::new(blocks, bath).expect("sampled model is valid")
}

pub fn random_qudit_state(d: usize, seed: u64) -> QuditState {
    let mut r = rng(seed);
    QuditState::new(random_density(d, &mut r)).expect("sampled state is valid")
}

/// `count` random grids with `intervals` strictly positive increments drawn
/// uniformly from (lo, hi]; grid points are the increment prefix sums.
pub fn random_grids(seed: u64, count: usize, intervals: usize, lo: f64, hi: f64) -> Vec<TimeGrid> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let mut t = 0.0;
            let points: Vec<f64> = (0..intervals)
                .map(|_| {
                    t += r.random_range(lo..hi) + f64::EPSILON;
                    t
                })
                .collect();
            TimeGrid::new(points).expect("increasing positive grid")
        })
        .collect()
}

/// Random intervention pair (X, Y) with entries uniform in the unit square.
pub fn random_intervention(d: usize, rng: &mut ChaCha8Rng) -> Intervention {
    Intervention {
        left: random_complex_matrix(d, rng),
        right: random_complex_matrix(d, rng),
    }
}
