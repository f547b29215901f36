//! Numerical laboratory for dephasing-type open quantum systems.
//!
//! A block-diagonal system-bath Hamiltonian H = sum_j |j><j| (x) H_j together
//! with a bath state rho_B induces a reduced dynamics that multiplies each
//! density-matrix element rho_{jl} by a dephasing function
//! phi_{jl}(t) = tr[exp(-itH_j) rho_B exp(itH_l)]. This crate constructs such
//! models (finite blocks, spectral measures, boson baths), evaluates their
//! dephasing matrices and channels, decides CP-divisibility and the semigroup
//! property, and checks the multi-time quantum-regression hierarchy both by
//! brute force and through closed-form Weyl-operator identities.
//!
//! All values are immutable after construction and all operations are pure
//! functions of their inputs, so batch sweeps can be dispatched to parallel
//! workers without affecting results.

pub mod divisibility;
pub mod error;
pub mod linalg;
pub mod model;
pub mod pvquad;
pub mod quad;
pub mod regression;
pub mod sampling;
pub mod spinboson;

pub use error::{Error, Result};
pub use linalg::CMat;
pub use model::{
    apply_channel, coherence, commuting_dephasing, dephasing_matrix, reduced_dynamics_oracle,
    BlockModel, DephasingMatrix, DephasingTrajectory, HermitianMatrix, LevelFunction, QuditState,
    SpectralMeasure, TrajectorySource,
};

pub use num_complex::Complex64;
