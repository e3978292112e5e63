//! Spinless lattice fermions with nearest-neighbor hopping t and repulsion V
//! on the 2D square lattice, together with the partial-continuum-limit
//! effective model built from six Brillouin-zone regions: two antinodal
//! (hyperbolic) flavors and four nodal (linear-dispersion) chiral branches.
//!
//! The crate provides:
//! - closed-form effective parameters and linearized bands ([`params`]),
//! - the integer-exact six-region zone decomposition ([`zone`]),
//! - exact diagonalization of the microscopic model on tiny tori ([`ed`]),
//! - nodal boson dispersions and thermodynamics ([`boson`]),
//! - brute-force operator-identity checks on truncated Fock spaces
//!   ([`verify`]): density-commutator anomaly, Kronig identity, and the
//!   fermion/boson forms of the nodal Hamiltonian,
//! - the self-consistent antinodal CDW gap ([`meanfield`]).

pub mod boson;
pub mod ed;
pub mod meanfield;
pub mod momentum;
pub mod params;
pub mod verify;
pub mod zone;

pub use boson::{
    closed_form_dispersion, effective_antinodal_couplings, free_energy, ground_constant,
    numeric_dispersion, BosonGrid, DispersionResult, DispersionSource, QuadraticBosonForm,
    ThermoResult,
};
pub use ed::{FockBasis, LatticeSpec, SparseOperator};
pub use meanfield::{
    antinodal_filling, filling_susceptibility, gap_phase_scan, gap_rhs, mf_bands, solve_gap,
    solve_gap_bisection, AntinodalGrid, GapOptions, GapScanPoint, GapSolution,
};
pub use momentum::{CutoffWindow, Momentum};
pub use params::{
    band_energy, derive_effective_params, linearized_band, stability_check, EffectiveParams,
    MicroParams, Stability,
};
pub use verify::{TruncatedChiralSpace, VerifyReport};
pub use zone::{filling_fractions, q_point, BzGrid, Flavor, RegionIndex, RegionMap};

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The nodal quadratic form loses positivity at gamma >= 1,
    /// equivalently V >= 4 pi t / sin(Q).
    #[error("unstable coupling: gamma = {gamma} >= 1")]
    UnstableCoupling { gamma: f64 },

    #[error("no convergence after {iterations} iterations (last increments {trace:?})")]
    NonConvergence { iterations: usize, trace: Vec<f64> },

    #[error("iteration oscillates after {iterations} steps; increase damping (tail {trace:?})")]
    Oscillation { iterations: usize, trace: Vec<f64> },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
