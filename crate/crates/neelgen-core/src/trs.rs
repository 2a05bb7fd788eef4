//! Time-reversal-symmetric antiferromagnetic states.
//!
//! The building block |Ψ_M⟩ is the normalized symmetric combination of all
//! configurations with M down spins, each weighted by the product of
//! sublattice signs η_j over the down sites:
//!
//!   |Ψ_M⟩ = C(N,M)^{-1/2} Σ_{|A|=M} (Π_{j∈A} η_j) |A down⟩
//!
//! Amplitudes are real and every single-site Bloch vector vanishes, so the
//! states are invariant under time reversal (complex conjugation combined
//! with the global π spin flip). The same state is reached by applying the
//! staggered lowering operator S^-_Q repeatedly to the fully polarized
//! state; both routes are implemented and cross-checked.

use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::state::{FourierOp, StateVector};

/// Exact binomial coefficient as f64 (exact for the n ≤ 24 sizes this
/// crate handles).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    acc as f64
}

/// Fully polarized (all up) product state.
pub fn build_ferro(n_sites: usize) -> Result<StateVector> {
    StateVector::basis(n_sites, (1usize << n_sites) - 1)
}

/// Bitmask of sites with η_j = -1.
fn minority_mask(lat: &LatticeSpec) -> usize {
    lat.eta
        .iter()
        .enumerate()
        .filter(|(_, &e)| e < 0.0)
        .fold(0usize, |acc, (j, _)| acc | (1usize << j))
}

/// |Ψ_M⟩ by direct combinatorial fill (one pass over the basis).
pub fn build_psi_m(lat: &LatticeSpec, m: usize) -> Result<StateVector> {
    let n = lat.n_sites;
    if m > n {
        return Err(Error::MOutOfRange { m, n });
    }
    let neg = minority_mask(lat);
    let full = (1usize << n) - 1;
    let norm = 1.0 / binomial(n, m).sqrt();
    let mut out = StateVector::zero(n)?.into_amplitudes();
    for (mask, slot) in out.iter_mut().enumerate() {
        let downs = n - mask.count_ones() as usize;
        if downs != m {
            continue;
        }
        // Product of η over down sites = parity of down ∩ minority.
        let sign = if ((!mask & full) & neg).count_ones() % 2 == 0 {
            norm
        } else {
            -norm
        };
        *slot = Complex64::new(sign, 0.0);
    }
    StateVector::from_amplitudes(n, out)
}

/// |Ψ_M⟩ via M applications of S^-_Q to the polarized state, with the
/// closed-form normalization Π_{k=1..M} √(N / (k (N-k+1))). Slower than
/// the fill route; kept as an independent construction for cross-checks.
pub fn build_psi_m_via_operators(lat: &LatticeSpec, m: usize) -> Result<StateVector> {
    let n = lat.n_sites;
    if m > n {
        return Err(Error::MOutOfRange { m, n });
    }
    let q = lat.ordering_vector().to_vec();
    let mut state = build_ferro(n)?;
    let mut prefactor = 1.0f64;
    for k in 1..=m {
        state = state.apply_fourier_op(lat, &q, FourierOp::SMinus)?;
        prefactor *= (n as f64 / (k as f64 * (n - k + 1) as f64)).sqrt();
    }
    Ok(state.scaled(Complex64::new(prefactor, 0.0)))
}

/// √(M(N-M+1))/N: the magnitude of the matrix element
/// ⟨Ψ_{M-1}| 2 s^x_j |Ψ_M⟩ (and, by M → M+1, of ⟨Ψ_{M+1}| 2 s^x_j |Ψ_M⟩),
/// which fixes the sector mixing produced by one local measurement.
pub fn alpha_coefficient(n: usize, m: usize) -> f64 {
    if m == 0 || m > n {
        return 0.0;
    }
    (m as f64 * (n - m + 1) as f64).sqrt() / n as f64
}

/// Default width of the sector-weight profile: √N/4. Narrow enough that
/// ⟨𝒮_z⟩ fluctuations stay O(N^{1/2}), wide enough that several sectors
/// interfere.
pub fn default_sigma(n_sites: usize) -> f64 {
    (n_sites as f64).sqrt() / 4.0
}

/// Gaussian weights over even-M sectors, u_M ∝ exp(-(M-N/2)²/(4σ²)),
/// normalized so Σ u_M² = 1.
pub fn gaussian_sector_weights(n_sites: usize, sigma: f64) -> Result<BTreeMap<usize, f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidWeights(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    let center = n_sites as f64 / 2.0;
    let mut w: BTreeMap<usize, f64> = BTreeMap::new();
    for m in (0..=n_sites).step_by(2) {
        let d = m as f64 - center;
        w.insert(m, (-d * d / (4.0 * sigma * sigma)).exp());
    }
    let norm: f64 = w.values().map(|u| u * u).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return Err(Error::InvalidWeights("all weights underflowed".into()));
    }
    for u in w.values_mut() {
        *u /= norm;
    }
    Ok(w)
}

/// Superposition Σ_M u_M |Ψ_M⟩ with real weights (Σ u_M² = 1 required).
/// With weights spread over several sectors the state develops an easy
/// axis: the x/y orientation of the post-measurement order is pinned
/// instead of free.
pub fn build_superposition(
    lat: &LatticeSpec,
    weights: &BTreeMap<usize, f64>,
) -> Result<StateVector> {
    let n = lat.n_sites;
    if weights.is_empty() {
        return Err(Error::InvalidWeights("no sector weights given".into()));
    }
    let mut total = 0.0;
    for (&m, &u) in weights {
        if m > n {
            return Err(Error::MOutOfRange { m, n });
        }
        if !u.is_finite() {
            return Err(Error::InvalidWeights(format!(
                "weight for M={m} is not finite"
            )));
        }
        total += u * u;
    }
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidWeights(format!(
            "sector weights must satisfy sum of squares = 1, got {total}"
        )));
    }
    let neg = minority_mask(lat);
    let full = (1usize << n) - 1;
    let norms: Vec<f64> = (0..=n).map(|m| 1.0 / binomial(n, m).sqrt()).collect();
    let mut out = StateVector::zero(n)?.into_amplitudes();
    for (mask, slot) in out.iter_mut().enumerate() {
        let downs = n - mask.count_ones() as usize;
        if let Some(&u) = weights.get(&downs) {
            let mut a = u * norms[downs];
            if ((!mask & full) & neg).count_ones() % 2 == 1 {
                a = -a;
            }
            *slot = Complex64::new(a, 0.0);
        }
    }
    StateVector::from_amplitudes(n, out)
}

/// Convenience: Gaussian easy-axis state with the default width.
pub fn build_easy_axis(lat: &LatticeSpec, sigma: Option<f64>) -> Result<StateVector> {
    let s = sigma.unwrap_or_else(|| default_sigma(lat.n_sites));
    let w = gaussian_sector_weights(lat.n_sites, s)?;
    build_superposition(lat, &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::chain;
    use crate::state::{inner, SiteOp};

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(16, 8), 12870.0);
        assert_eq!(binomial(24, 12), 2704156.0);
        assert_eq!(binomial(3, 5), 0.0);
    }

    #[test]
    fn psi_m_amplitudes_n4() {
        let lat = chain(4).unwrap();
        let psi = build_psi_m(&lat, 2).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-14);
        let r = 1.0 / 6f64.sqrt();
        // down sites {0,1}: mask 0b1100, sign η_0 η_1 = -1
        assert!((psi.amp(0b1100).re + r).abs() < 1e-15);
        // down sites {0,2}: mask 0b1010, sign η_0 η_2 = +1
        assert!((psi.amp(0b1010).re - r).abs() < 1e-15);
        // down sites {1,3}: mask 0b0101, sign η_1 η_3 = +1
        assert!((psi.amp(0b0101).re - r).abs() < 1e-15);
        // wrong sector untouched
        assert_eq!(psi.amp(0b1110).re, 0.0);
    }

    #[test]
    fn psi_zero_is_ferro() {
        let lat = chain(4).unwrap();
        let psi = build_psi_m(&lat, 0).unwrap();
        assert_eq!(psi.amp(0b1111).re, 1.0);
        assert!((psi.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn operator_route_matches_fill() {
        let lat = chain(8).unwrap();
        for m in [1, 3, 4, 7] {
            let a = build_psi_m(&lat, m).unwrap();
            let b = build_psi_m_via_operators(&lat, m).unwrap();
            let dev = a.minus(&b).unwrap().norm();
            assert!(dev < 1e-12, "m={m}: route deviation {dev}");
            assert!((b.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sector_ladder_matrix_element() {
        // ⟨Ψ_{M-1}| s^x_0 |Ψ_M⟩ = α_M / 2 at a site with η = +1.
        let lat = chain(8).unwrap();
        for m in [1, 3, 4, 6] {
            let hi = build_psi_m(&lat, m).unwrap();
            let lo = build_psi_m(&lat, m - 1).unwrap();
            let sx = hi.apply_site_op(0, SiteOp::Sx).unwrap();
            let got = inner(&lo, &sx).unwrap();
            let want = alpha_coefficient(8, m) / 2.0;
            assert!((got.re - want).abs() < 1e-13, "m={m}: {} vs {want}", got.re);
            assert!(got.im.abs() < 1e-15);
        }
    }

    #[test]
    fn alpha_endpoints() {
        assert_eq!(alpha_coefficient(8, 0), 0.0);
        assert_eq!(alpha_coefficient(8, 9), 0.0);
        // symmetric under M → N-M+1
        assert!((alpha_coefficient(12, 4) - alpha_coefficient(12, 9)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_weights_profile() {
        let w = gaussian_sector_weights(16, 2.0).unwrap();
        let total: f64 = w.values().map(|u| u * u).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let peak = w
            .iter()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(*peak.0, 8);
        assert!(w.keys().all(|m| m % 2 == 0));
        // vanishing width collapses onto the central sector
        let w0 = gaussian_sector_weights(8, 1e-3).unwrap();
        assert!((w0[&4] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn superposition_sectors_match_weights() {
        let lat = chain(8).unwrap();
        let w = gaussian_sector_weights(8, default_sigma(8)).unwrap();
        let psi = build_superposition(&lat, &w).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-13);
        let secs = psi.sector_decompose();
        for (downs, (_, weight)) in secs.iter().enumerate() {
            let expect = w.get(&downs).map_or(0.0, |u| u * u);
            assert!(
                (weight - expect).abs() < 1e-13,
                "sector {downs}: {weight} vs {expect}"
            );
        }
    }

    #[test]
    fn superposition_rejects_bad_weights() {
        let lat = chain(4).unwrap();
        let mut w = BTreeMap::new();
        w.insert(2usize, 0.5f64);
        assert!(matches!(
            build_superposition(&lat, &w),
            Err(Error::InvalidWeights(_))
        ));
        let mut w = BTreeMap::new();
        w.insert(9usize, 1.0f64);
        assert!(matches!(
            build_superposition(&lat, &w),
            Err(Error::MOutOfRange { .. })
        ));
        assert!(build_psi_m(&lat, 5).is_err());
    }
}
