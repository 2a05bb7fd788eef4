//! Exact spin-1/2 simulator for measurement-induced antiferromagnetic
//! order.
//!
//! The crate builds time-reversal-symmetric superpositions of staggered
//! configurations on bipartite lattices, applies local projective s^x
//! measurements to them, and follows what the measurements create: a
//! staggered transverse fan around the measured site, sector mixing with
//! fixed coefficients, a pinned or free order axis, and — under exact
//! unitary dynamics — a front that carries the signal outward at the
//! spin-wave group velocity.
//!
//! Conventions, fixed crate-wide:
//! - basis masks: bit j set means site j is up (s^z = +1/2);
//! - Fourier operators S^α_q carry the phase e^{+iq·r_j} for every
//!   component, so (S^α_q)† = S^ᾱ_{-q};
//! - the exchange Fourier transform is J_q = -Σ_δ J(δ) cos(q·δ), making
//!   J_q maximal at the ordering vector Q for antiferromagnetic couplings;
//! - energies are in units of the nearest-neighbor coupling, times in its
//!   inverse.
//!
//! Everything is dense and exact: no truncation, no sampling error beyond
//! the explicitly seeded measurement draws. Sizes are capped accordingly
//! (2^N amplitudes; N ≤ 24 for states, N ≤ 16 for exact evolution).

pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod measurement;
pub mod observables;
pub mod state;
pub mod trs;

pub use error::{Error, Result};
pub use lattice::{Geometry, LatticeSpec};
pub use state::{
    inner, read_state_file, sector_views, write_state_file, FourierOp, SiteOp, StateVector,
    MAX_SITES,
};

pub use dynamics::{
    arrival_times, decoherence_kernel, decoherence_kernel_grid, exact_green, half_max_front,
    magnon_dispersion, EigenPropagator, Hamiltonian, SpectralState, MAX_EVOLVE_SITES,
};
pub use measurement::{
    branch_pair, decompose_onto_trs, measure_sx, run_cascade, run_cascade_ensemble, BranchPair,
    Measurement, Outcome, Schedule, TrajectoryStep, TrsDecomposition,
};
pub use observables::{
    axis_diagnostics, correlator, correlator_mixed, site_bloch, site_entropy, site_expectation,
    staggered_order, sz_moments, AxisDiagnostics, Component,
};
pub use trs::{
    alpha_coefficient, binomial, build_easy_axis, build_ferro, build_psi_m,
    build_psi_m_via_operators, build_superposition, default_sigma, gaussian_sector_weights,
};
