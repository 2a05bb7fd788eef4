//! Shared fixtures for the benchmarks: deterministic states and lattices at
//! the sizes the hot paths are tuned for.

use neelgen_core::{lattice, LatticeSpec, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn chain(n: usize) -> LatticeSpec {
    lattice::chain(n).expect("even chain")
}

pub fn random_state(n: usize) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    StateVector::random(n, &mut rng).expect("nonzero")
}
