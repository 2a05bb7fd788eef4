//! Local projective measurement of s^x and measurement cascades.
//!
//! A measurement at site j splits a state with the projectors
//! W^± = 1/2 ± s^x_j. Both unnormalized branches are kept: their squared
//! norms are the outcome probabilities, and the pair resolves the identity
//! (W^+ + W^- = 1), which the tests pin down.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::observables::{axis_diagnostics, staggered_order, sz_moments};
use crate::state::{SiteOp, StateVector};
use crate::trs::binomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    /// ±1: the measured eigenvalue is sign/2.
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

/// Both projective branches of one s^x measurement, unnormalized.
#[derive(Debug, Clone)]
pub struct BranchPair {
    pub site: usize,
    /// W^+ ψ (not normalized; ‖·‖² = p_plus for normalized input).
    pub plus: StateVector,
    /// W^- ψ.
    pub minus: StateVector,
    pub p_plus: f64,
    pub p_minus: f64,
}

impl BranchPair {
    pub fn branch(&self, outcome: Outcome) -> &StateVector {
        match outcome {
            Outcome::Plus => &self.plus,
            Outcome::Minus => &self.minus,
        }
    }

    pub fn probability(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Plus => self.p_plus,
            Outcome::Minus => self.p_minus,
        }
    }
}

pub fn branch_pair(state: &StateVector, site: usize) -> Result<BranchPair> {
    let norm_sq = state.norm_sq();
    if norm_sq < 1e-300 {
        return Err(Error::ZeroNorm);
    }
    let sx = state.apply_site_op(site, SiteOp::Sx)?;
    let half = Complex64::new(0.5, 0.0);
    let plus = state.scaled(half).plus(&sx)?;
    let minus = state.scaled(half).minus(&sx)?;
    let p_plus = plus.norm_sq() / norm_sq;
    let p_minus = minus.norm_sq() / norm_sq;
    Ok(BranchPair {
        site,
        plus,
        minus,
        p_plus,
        p_minus,
    })
}

/// One sampled projective measurement.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub site: usize,
    pub outcome: Outcome,
    /// Probability of the outcome that was drawn.
    pub probability: f64,
    /// Collapsed, normalized post-measurement state.
    pub state: StateVector,
}

pub fn measure_sx<R: Rng + ?Sized>(
    state: &StateVector,
    site: usize,
    rng: &mut R,
) -> Result<Measurement> {
    let pair = branch_pair(state, site)?;
    let total = pair.p_plus + pair.p_minus;
    if total < 1e-14 {
        return Err(Error::DegenerateBranches);
    }
    let u: f64 = rng.gen();
    let outcome = if u < pair.p_plus / total {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let raw = pair.branch(outcome);
    let collapsed = raw.normalized().map_err(|_| Error::DegenerateBranches)?;
    Ok(Measurement {
        site,
        outcome,
        probability: pair.probability(outcome) / total,
        state: collapsed,
    })
}

/// Expansion of a state over the staggered-sector basis {|Ψ_M⟩}.
#[derive(Debug, Clone)]
pub struct TrsDecomposition {
    /// ⟨Ψ_M|ψ⟩ keyed by M (number of down spins); every M present.
    pub coefficients: BTreeMap<usize, Complex64>,
    /// ‖ψ‖² of the input.
    pub total_norm_sq: f64,
    /// ‖ψ‖² − Σ_M |c_M|²: weight outside the symmetric subspace.
    /// Can dip an ulp below zero by rounding.
    pub incoherent_norm_sq: f64,
}

impl TrsDecomposition {
    pub fn coherent_norm_sq(&self) -> f64 {
        self.coefficients.values().map(|c| c.norm_sqr()).sum()
    }
}

/// Project onto every |Ψ_M⟩ in a single pass over the basis.
pub fn decompose_onto_trs(state: &StateVector, lat: &LatticeSpec) -> Result<TrsDecomposition> {
    let n = lat.n_sites;
    if n != state.n_sites() {
        return Err(Error::DimensionMismatch(n, state.n_sites()));
    }
    let neg = lat
        .eta
        .iter()
        .enumerate()
        .filter(|(_, &e)| e < 0.0)
        .fold(0usize, |acc, (j, _)| acc | (1usize << j));
    let full = (1usize << n) - 1;
    let norms: Vec<f64> = (0..=n).map(|m| 1.0 / binomial(n, m).sqrt()).collect();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    for (mask, &a) in state.amplitudes().iter().enumerate() {
        let downs = n - mask.count_ones() as usize;
        let sign = if ((!mask & full) & neg).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        coeffs[downs] += sign * norms[downs] * a;
    }
    let total_norm_sq = state.norm_sq();
    let coherent: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    Ok(TrsDecomposition {
        coefficients: coeffs.into_iter().enumerate().collect(),
        total_norm_sq,
        incoherent_norm_sq: total_norm_sq - coherent,
    })
}

/// Site-selection rule for a cascade.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Schedule {
    /// Uniformly random site each step.
    Random,
    /// 0, 1, 2, ... cyclically.
    RoundRobin,
    /// Fixed list; must cover every step.
    Explicit(Vec<usize>),
}

impl Schedule {
    fn site_at<R: Rng + ?Sized>(&self, step: usize, n: usize, rng: &mut R) -> Result<usize> {
        let site = match self {
            Schedule::Random => rng.gen_range(0..n),
            Schedule::RoundRobin => step % n,
            Schedule::Explicit(v) => *v.get(step).ok_or(Error::ScheduleExhausted(step))?,
        };
        if site >= n {
            return Err(Error::SiteOutOfRange { site, n });
        }
        Ok(site)
    }
}

/// Per-measurement snapshot, taken right after the collapse. `staggered_x`
/// is oriented so that a fan aligned with the latest outcome is positive.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrajectoryStep {
    pub step: usize,
    pub site: usize,
    /// +1 or -1 (measured value is outcome/2).
    pub outcome: i8,
    /// Probability of the branch that was taken.
    pub prob: f64,
    pub sz_mean: f64,
    pub sz_std: f64,
    pub staggered_x: f64,
    pub axis_anisotropy: f64,
}

/// Run one measurement cascade; returns the final collapsed state and one
/// record per step (step indices are 1-based).
pub fn run_cascade<R: Rng + ?Sized>(
    lat: &LatticeSpec,
    initial: &StateVector,
    schedule: &Schedule,
    n_steps: usize,
    rng: &mut R,
) -> Result<(StateVector, Vec<TrajectoryStep>)> {
    let n = lat.n_sites;
    if n != initial.n_sites() {
        return Err(Error::DimensionMismatch(n, initial.n_sites()));
    }
    let mut state = initial.normalized()?;
    let mut records = Vec::with_capacity(n_steps);
    for step in 0..n_steps {
        let site = schedule.site_at(step, n, rng)?;
        let meas = measure_sx(&state, site, rng)?;
        state = meas.state;
        let (sz_mean, sz_std) = sz_moments(&state)?;
        let orientation = meas.outcome.sign() * lat.eta[site];
        let staggered_x = orientation * staggered_order(&state, lat, Some(site))?;
        let diag = axis_diagnostics(&state, lat)?;
        records.push(TrajectoryStep {
            step: step + 1,
            site,
            outcome: meas.outcome.sign() as i8,
            prob: meas.probability,
            sz_mean,
            sz_std,
            staggered_x,
            axis_anisotropy: diag.ratio,
        });
    }
    Ok((state, records))
}

/// Independent trajectories from one seed. Trajectory `i` uses RNG stream
/// `i` of the seeded generator, so results are reproducible and do not
/// depend on thread count.
pub fn run_cascade_ensemble(
    lat: &LatticeSpec,
    initial: &StateVector,
    schedule: &Schedule,
    n_steps: usize,
    n_trajectories: usize,
    seed: u64,
) -> Result<Vec<Vec<TrajectoryStep>>> {
    (0..n_trajectories)
        .into_par_iter()
        .map(|tr| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(tr as u64);
            run_cascade(lat, initial, schedule, n_steps, &mut rng).map(|(_, rec)| rec)
        })
        .collect()
}
