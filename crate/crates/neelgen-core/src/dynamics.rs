//! Spin dynamics: the exchange Hamiltonian, its exact spectral
//! propagator at small N, the linear spin-wave dispersion, and the
//! analytic kernel that bounds how fast a local measurement's transverse
//! signal spreads.
//!
//! The Hamiltonian is the antiferromagnetic exchange model
//!
//!   H = Σ_{j<k} P_jk (s^+_j s^-_k + s^-_j s^+_k + 2 Δ_z s^z_j s^z_k)
//!
//! with P_jk the folded couplings from the lattice; equivalently
//! H = -Σ_q J_q (S^+_q S^-_{-q} + Δ_z S^z_q S^z_{-q}), which the tests
//! verify. H conserves total 𝒮_z, so exact evolution diagonalizes each
//! fixed-𝒮_z sector independently.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::state::{inner, sector_views, SiteOp, StateVector};

/// Exchange Hamiltonian on a lattice; Δ_z = 1 is the isotropic point.
///
/// No single-ion anisotropy parameter: a D Σ_j (s^z_j)² term is the
/// constant N·D/4 for spin-1/2, so easy-axis vs. easy-plane character can
/// only enter through the choice of initial state.
#[derive(Debug, Clone, Copy)]
pub struct Hamiltonian<'a> {
    pub lattice: &'a LatticeSpec,
    pub delta_z: f64,
}

impl<'a> Hamiltonian<'a> {
    pub fn new(lattice: &'a LatticeSpec, delta_z: f64) -> Self {
        Hamiltonian { lattice, delta_z }
    }

    /// H ψ in gather form (deterministic under parallelism).
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let n = self.lattice.n_sites;
        if n != state.n_sites() {
            return Err(Error::DimensionMismatch(n, state.n_sites()));
        }
        let bonds = &self.lattice.bonds;
        let dz = self.delta_z;
        let amps = state.amplitudes();
        let out: Vec<Complex64> = (0..amps.len())
            .into_par_iter()
            .map(|m| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut diag = 0.0;
                for &(j, k, p) in bonds {
                    if ((m >> j) ^ (m >> k)) & 1 == 0 {
                        diag += 0.5 * p * dz;
                    } else {
                        diag -= 0.5 * p * dz;
                        acc += p * amps[m ^ (1 << j) ^ (1 << k)];
                    }
                }
                acc + diag * amps[m]
            })
            .collect();
        StateVector::from_amplitudes(n, out)
    }

    /// Same operator assembled from Fourier components,
    /// -Σ_q J_q (S^+_q S^-_{-q} + Δ_z S^z_q S^z_{-q}). O(N) times more
    /// work than `apply`; kept as an independent cross-check.
    pub fn apply_qspace(&self, state: &StateVector) -> Result<StateVector> {
        let lat = self.lattice;
        if lat.n_sites != state.n_sites() {
            return Err(Error::DimensionMismatch(lat.n_sites, state.n_sites()));
        }
        let mut out = StateVector::zero(lat.n_sites)?;
        for iq in 0..lat.momenta.len() {
            let cq = -lat.jq[iq];
            if cq == 0.0 {
                continue;
            }
            let q = lat.momenta[iq].clone();
            let nq = lat.momenta[lat.negate_momentum(iq)].clone();
            let ladder = state
                .apply_fourier_op(lat, &nq, crate::state::FourierOp::SMinus)?
                .apply_fourier_op(lat, &q, crate::state::FourierOp::SPlus)?;
            out = out.add_scaled(&ladder, Complex64::new(cq, 0.0))?;
            let zz = state
                .apply_fourier_op(lat, &nq, crate::state::FourierOp::Sz)?
                .apply_fourier_op(lat, &q, crate::state::FourierOp::Sz)?;
            out = out.add_scaled(&zz, Complex64::new(cq * self.delta_z, 0.0))?;
        }
        Ok(out)
    }

    /// ⟨ψ|H|ψ⟩ / ‖ψ‖².
    pub fn energy(&self, state: &StateVector) -> Result<f64> {
        let norm_sq = state.norm_sq();
        if norm_sq < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        Ok(inner(state, &self.apply(state)?)?.re / norm_sq)
    }
}

/// Spin-wave dispersion ω_q = √((J_Q - J_q)(J_Q - J_{q-Q})) at every grid
/// momentum, in the order of `lat.momenta`. Both factors come from table
/// lookups, so ω = 0 exactly at q = 0 and q = Q.
pub fn magnon_dispersion(lat: &LatticeSpec) -> Result<Vec<f64>> {
    let jq_max = lat.j_at_ordering();
    let mut omega = Vec::with_capacity(lat.momenta.len());
    for iq in 0..lat.momenta.len() {
        let a = jq_max - lat.jq[iq];
        let b = jq_max - lat.jq[lat.sub_ordering(iq)];
        let rad = a * b;
        if rad < -1e-12 {
            return Err(Error::NegativeRadicand(rad, lat.momenta[iq].clone()));
        }
        omega.push(rad.max(0.0).sqrt());
    }
    Ok(omega)
}

/// Free-magnon envelope G(r, t) = (1/4N) Σ_q e^{i(q·r - ω_q t)}, evaluated
/// by the direct sum. Rows are times, columns are sites.
pub fn decoherence_kernel(lat: &LatticeSpec, times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let omega = magnon_dispersion(lat)?;
    let pref = 1.0 / (4.0 * lat.n_sites as f64);
    Ok(times
        .iter()
        .map(|&t| {
            (0..lat.n_sites)
                .map(|r| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (iq, &w) in omega.iter().enumerate() {
                        acc += Complex64::from_polar(pref, lat.q_dot_r(iq, r) - w * t);
                    }
                    acc
                })
                .collect()
        })
        .collect())
}

/// Same kernel through an inverse FFT over the momentum grid; scales to
/// large lattices. Matches `decoherence_kernel` to rounding.
pub fn decoherence_kernel_grid(
    lat: &LatticeSpec,
    times: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    let omega = magnon_dispersion(lat)?;
    let pref = 1.0 / (4.0 * lat.n_sites as f64);
    let mut planner = FftPlanner::<f64>::new();
    Ok(times
        .iter()
        .map(|&t| {
            let mut vals: Vec<Complex64> = omega
                .iter()
                .map(|&w| Complex64::from_polar(pref, -w * t))
                .collect();
            inverse_fft_grid(&mut vals, &lat.linear_sizes, &mut planner);
            vals
        })
        .collect())
}

/// Unnormalized inverse DFT along every axis of a row-major grid
/// (last dimension fastest), in place.
fn inverse_fft_grid(values: &mut [Complex64], dims: &[usize], planner: &mut FftPlanner<f64>) {
    let total = values.len();
    for (axis, &len) in dims.iter().enumerate() {
        let stride: usize = dims[axis + 1..].iter().product();
        let fft = planner.plan_fft(len, FftDirection::Inverse);
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let block = len * stride;
        for base in (0..total).step_by(block) {
            for off in 0..stride {
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + off + k * stride];
                }
                fft.process(&mut line);
                for (k, &v) in line.iter().enumerate() {
                    values[base + off + k * stride] = v;
                }
            }
        }
    }
}

/// Position of the outgoing front on a chain profile |G(r, t)| over
/// r = 0..N: the largest r ≤ N/2 whose magnitude still reaches half the
/// spatial maximum. Robust against the distance-independent oscillation
/// that sits behind the front and defeats a plain argmax.
pub fn half_max_front(profile: &[f64]) -> usize {
    let r_max = profile.len() / 2;
    let peak = profile[1..=r_max]
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    if peak < 1e-300 {
        return 0;
    }
    (1..=r_max)
        .rev()
        .find(|&r| profile[r] >= 0.5 * peak)
        .unwrap_or(0)
}

/// Exact evolution is dense diagonalization per 𝒮_z sector; above this
/// size the sector matrices are no longer desk-scale.
pub const MAX_EVOLVE_SITES: usize = 16;

struct SectorSpectrum {
    members: Vec<usize>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

/// Exact propagator e^{-iHt} stored as one symmetric eigendecomposition
/// per 𝒮_z sector.
pub struct EigenPropagator {
    n_sites: usize,
    sectors: Vec<SectorSpectrum>,
}

impl EigenPropagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        let n = h.lattice.n_sites;
        if n > MAX_EVOLVE_SITES {
            return Err(Error::SizeCap {
                n,
                cap: MAX_EVOLVE_SITES,
            });
        }
        let bonds = h.lattice.bonds.clone();
        let dz = h.delta_z;
        let sectors: Vec<SectorSpectrum> = sector_views(n)
            .into_par_iter()
            .map(|view| {
                let members = view.members;
                let d = members.len();
                let mut mat = DMatrix::<f64>::zeros(d, d);
                for (col, &m) in members.iter().enumerate() {
                    let mut diag = 0.0;
                    for &(j, k, p) in &bonds {
                        if ((m >> j) ^ (m >> k)) & 1 == 0 {
                            diag += 0.5 * p * dz;
                        } else {
                            diag -= 0.5 * p * dz;
                            let partner = m ^ (1 << j) ^ (1 << k);
                            // flips conserve popcount: partner is in this sector
                            let row = members.binary_search(&partner).unwrap();
                            mat[(row, col)] += p;
                        }
                    }
                    mat[(col, col)] = diag;
                }
                let eig = SymmetricEigen::new(mat);
                SectorSpectrum {
                    members,
                    eigenvalues: eig.eigenvalues,
                    eigenvectors: eig.eigenvectors,
                }
            })
            .collect();
        Ok(EigenPropagator { n_sites: n, sectors })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Smallest eigenvalue across all sectors (ground-state energy).
    pub fn ground_energy(&self) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| s.eigenvalues.iter().cloned())
            .fold(f64::INFINITY, f64::min)
    }

    /// Expand a state in the energy eigenbasis once; cheap to evaluate at
    /// many times afterwards.
    pub fn decompose(&self, state: &StateVector) -> Result<SpectralState<'_>> {
        if state.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch(state.n_sites(), self.n_sites));
        }
        let coeffs = self
            .sectors
            .iter()
            .map(|s| {
                let d = s.members.len();
                let mut xr = DVector::<f64>::zeros(d);
                let mut xi = DVector::<f64>::zeros(d);
                for (i, &m) in s.members.iter().enumerate() {
                    let a = state.amp(m);
                    xr[i] = a.re;
                    xi[i] = a.im;
                }
                let cr = s.eigenvectors.tr_mul(&xr);
                let ci = s.eigenvectors.tr_mul(&xi);
                (0..d).map(|k| Complex64::new(cr[k], ci[k])).collect()
            })
            .collect();
        Ok(SpectralState { prop: self, coeffs })
    }

    /// e^{-iHt} ψ.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        Ok(self.decompose(state)?.at_time(t))
    }
}

/// A state expressed in the propagator's eigenbasis.
pub struct SpectralState<'a> {
    prop: &'a EigenPropagator,
    coeffs: Vec<Vec<Complex64>>,
}

impl SpectralState<'_> {
    pub fn at_time(&self, t: f64) -> StateVector {
        let n = self.prop.n_sites;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (s, c) in self.prop.sectors.iter().zip(&self.coeffs) {
            let d = s.members.len();
            let mut yr = DVector::<f64>::zeros(d);
            let mut yi = DVector::<f64>::zeros(d);
            for k in 0..d {
                let rotated = c[k] * Complex64::from_polar(1.0, -s.eigenvalues[k] * t);
                yr[k] = rotated.re;
                yi[k] = rotated.im;
            }
            let vr = &s.eigenvectors * yr;
            let vi = &s.eigenvectors * yi;
            for (i, &m) in s.members.iter().enumerate() {
                amps[m] = Complex64::new(vr[i], vi[i]);
            }
        }
        StateVector::from_amplitudes(n, amps).expect("dimensions fixed by propagator")
    }
}

/// Connected transverse propagation signal
/// G_p(t) = ⟨ψ(t)| s^+_p |χ(t)⟩ - ⟨ψ| s^+_p |χ⟩ with χ = s^-_source ψ.
/// Rows are times, columns follow `probes`. G ≡ 0 at t = 0 by
/// construction; pass a normalized ψ.
pub fn exact_green(
    prop: &EigenPropagator,
    state: &StateVector,
    source: usize,
    probes: &[usize],
    times: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    let chi = state.apply_site_op(source, SiteOp::SMinus)?;
    let mut eq = Vec::with_capacity(probes.len());
    for &p in probes {
        eq.push(inner(state, &chi.apply_site_op(p, SiteOp::SPlus)?)?);
    }
    let spectral_psi = prop.decompose(state)?;
    let spectral_chi = prop.decompose(&chi)?;
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let psi_t = spectral_psi.at_time(t);
        let chi_t = spectral_chi.at_time(t);
        let mut row = Vec::with_capacity(probes.len());
        for (&p, &e) in probes.iter().zip(&eq) {
            row.push(inner(&psi_t, &chi_t.apply_site_op(p, SiteOp::SPlus)?)? - e);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Per-probe arrival time: argmax of |G| over times ≤ t_max. Restricting
/// the window to (max distance)/(group velocity) keeps later boundary
/// revivals from masking the first passage of the front.
pub fn arrival_times(green: &[Vec<Complex64>], times: &[f64], t_max: f64) -> Vec<f64> {
    if green.is_empty() {
        return Vec::new();
    }
    let n_probes = green[0].len();
    (0..n_probes)
        .map(|p| {
            let mut best_t = times[0];
            let mut best_v = -1.0f64;
            for (ti, &t) in times.iter().enumerate() {
                if t > t_max + 1e-12 {
                    break;
                }
                let v = green[ti][p].norm();
                if v > best_v {
                    best_v = v;
                    best_t = t;
                }
            }
            best_t
        })
        .collect()
}
