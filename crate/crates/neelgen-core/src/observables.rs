//! Expectation values and equal-time momentum-space correlators.
//!
//! The correlator convention is K^{αβ}(q) = ⟨S^α_q S^β_{-q}⟩, evaluated as
//! ⟨S^ᾱ_{-q} ψ | S^β_{-q} ψ⟩ with ᾱ the ladder conjugate of α, so that the
//! diagonal entries K^{ᾱα} are manifestly nonnegative. K^{+-}(Q) at the
//! ordering vector is the antiferromagnetic weight; K^{--}(Q) is only
//! nonzero when the transverse order has a pinned axis, and its phase
//! encodes the axis direction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::state::{inner, FourierOp, SiteOp, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Plus,
    Minus,
    X,
    Y,
    Z,
}

impl Component {
    /// Ladder conjugate: (S^α_q)† = S^ᾱ_{-q}.
    pub fn conjugate(self) -> Self {
        match self {
            Component::Plus => Component::Minus,
            Component::Minus => Component::Plus,
            other => other,
        }
    }
}

/// S^α_q ψ for any component; x and y are built from the ladder pair.
pub fn apply_component_fourier(
    state: &StateVector,
    lat: &LatticeSpec,
    q: &[usize],
    comp: Component,
) -> Result<StateVector> {
    match comp {
        Component::Plus => state.apply_fourier_op(lat, q, FourierOp::SPlus),
        Component::Minus => state.apply_fourier_op(lat, q, FourierOp::SMinus),
        Component::Z => state.apply_fourier_op(lat, q, FourierOp::Sz),
        Component::X => {
            let p = state.apply_fourier_op(lat, q, FourierOp::SPlus)?;
            let m = state.apply_fourier_op(lat, q, FourierOp::SMinus)?;
            Ok(p.plus(&m)?.scaled(Complex64::new(0.5, 0.0)))
        }
        Component::Y => {
            let p = state.apply_fourier_op(lat, q, FourierOp::SPlus)?;
            let m = state.apply_fourier_op(lat, q, FourierOp::SMinus)?;
            Ok(p.minus(&m)?.scaled(Complex64::new(0.0, -0.5)))
        }
    }
}

/// K^{αβ}(q) = ⟨ψ| S^α_q S^β_{-q} |ψ⟩ (no normalization: pass a
/// normalized state, or use the raw value for ensemble sums).
pub fn correlator(
    state: &StateVector,
    lat: &LatticeSpec,
    alpha: Component,
    beta: Component,
    q: &[usize],
) -> Result<Complex64> {
    let iq = lat.momentum_index(q)?;
    let neg = lat.momenta[lat.negate_momentum(iq)].clone();
    let left = apply_component_fourier(state, lat, &neg, alpha.conjugate())?;
    let right = apply_component_fourier(state, lat, &neg, beta)?;
    inner(&left, &right)
}

/// Ensemble average Σ_i w_i K^{αβ}_i(q) over normalized states with
/// probability weights.
pub fn correlator_mixed(
    parts: &[(f64, &StateVector)],
    lat: &LatticeSpec,
    alpha: Component,
    beta: Component,
    q: &[usize],
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(w, state) in parts {
        acc += w * correlator(state, lat, alpha, beta, q)?;
    }
    Ok(acc)
}

/// ⟨ψ|O_j|ψ⟩ / ‖ψ‖² for a single-site operator.
pub fn site_expectation(state: &StateVector, site: usize, op: SiteOp) -> Result<Complex64> {
    let norm_sq = state.norm_sq();
    if norm_sq < 1e-300 {
        return Err(Error::ZeroNorm);
    }
    Ok(inner(state, &state.apply_site_op(site, op)?)? / norm_sq)
}

/// Bloch vector (2⟨s^x⟩, 2⟨s^y⟩, 2⟨s^z⟩) of the site's reduced state.
pub fn site_bloch(state: &StateVector, site: usize) -> Result<[f64; 3]> {
    Ok([
        2.0 * site_expectation(state, site, SiteOp::Sx)?.re,
        2.0 * site_expectation(state, site, SiteOp::Sy)?.re,
        2.0 * site_expectation(state, site, SiteOp::Sz)?.re,
    ])
}

/// Staggered transverse order (1/N') Σ_j η_j · 2⟨s^x_j⟩, with an optional
/// site left out of the average (N' counts the included sites). The sign
/// convention follows η: callers align it with a measurement outcome by
/// multiplying with outcome · η_site.
pub fn staggered_order(
    state: &StateVector,
    lat: &LatticeSpec,
    exclude: Option<usize>,
) -> Result<f64> {
    if lat.n_sites != state.n_sites() {
        return Err(Error::DimensionMismatch(lat.n_sites, state.n_sites()));
    }
    if let Some(site) = exclude {
        if site >= lat.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n: lat.n_sites,
            });
        }
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for j in 0..lat.n_sites {
        if Some(j) == exclude {
            continue;
        }
        acc += lat.eta[j] * 2.0 * site_expectation(state, j, SiteOp::Sx)?.re;
        count += 1;
    }
    Ok(acc / count as f64)
}

/// Mean and standard deviation of total 𝒮_z in the computational basis.
pub fn sz_moments(state: &StateVector) -> Result<(f64, f64)> {
    let norm_sq = state.norm_sq();
    if norm_sq < 1e-300 {
        return Err(Error::ZeroNorm);
    }
    let n = state.n_sites() as f64;
    let mut mean = 0.0;
    let mut second = 0.0;
    for (m, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let sz = m.count_ones() as f64 - n / 2.0;
        mean += p * sz;
        second += p * sz * sz;
    }
    mean /= norm_sq;
    second /= norm_sq;
    Ok((mean, (second - mean * mean).max(0.0).sqrt()))
}

/// Transverse-axis diagnostics at the ordering vector Q.
#[derive(Debug, Clone, Copy)]
pub struct AxisDiagnostics {
    /// K^{+-}(Q), real and nonnegative.
    pub k_pm: f64,
    /// K^{--}(Q).
    pub k_mm: Complex64,
    /// |K^{--}(Q)| / K^{+-}(Q): 0 for a free transverse axis, O(1) when
    /// the axis is pinned.
    pub ratio: f64,
    /// Axis direction, arg(K^{--})/2 ∈ (-π/2, π/2]; shifts by +θ under
    /// `rotate_z(θ)`.
    pub angle: f64,
}

pub fn axis_diagnostics(state: &StateVector, lat: &LatticeSpec) -> Result<AxisDiagnostics> {
    let q = lat.ordering_vector().to_vec();
    let k_pm = correlator(state, lat, Component::Plus, Component::Minus, &q)?.re;
    if k_pm < 1e-14 {
        return Err(Error::NoAfmCorrelations);
    }
    let k_mm = correlator(state, lat, Component::Minus, Component::Minus, &q)?;
    Ok(AxisDiagnostics {
        k_pm,
        k_mm,
        ratio: k_mm.norm() / k_pm,
        angle: 0.5 * k_mm.arg(),
    })
}

/// Von Neumann entropy (bits) of one site's reduced density matrix,
/// computed from the Bloch vector of the pure global state.
pub fn site_entropy(state: &StateVector, site: usize) -> Result<f64> {
    let b = site_bloch(state, site)?;
    let r = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt().min(1.0);
    let lambdas = [(1.0 + r) / 2.0, (1.0 - r) / 2.0];
    Ok(lambdas
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| -l * l.log2())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::chain;
    use crate::measurement::branch_pair;
    use crate::trs::{build_easy_axis, build_psi_m};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_state_bloch_and_entropy() {
        // site 0 polarized along +x, site 1 up
        let r = 1.0 / 2f64.sqrt();
        let amps = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(r, 0.0),
            Complex64::new(r, 0.0),
        ];
        let s = StateVector::from_amplitudes(2, amps).unwrap();
        let b0 = site_bloch(&s, 0).unwrap();
        assert!((b0[0] - 1.0).abs() < 1e-14 && b0[1].abs() < 1e-14 && b0[2].abs() < 1e-14);
        let b1 = site_bloch(&s, 1).unwrap();
        assert!((b1[2] - 1.0).abs() < 1e-14);
        assert!(site_entropy(&s, 0).unwrap() < 1e-12);
        assert!(site_entropy(&s, 1).unwrap() < 1e-12);
    }

    #[test]
    fn singlet_sites_maximally_mixed() {
        let lat = chain(2).unwrap();
        let s = build_psi_m(&lat, 1).unwrap();
        for j in 0..2 {
            let b = site_bloch(&s, j).unwrap();
            assert!(b.iter().all(|x| x.abs() < 1e-14));
            assert!((site_entropy(&s, j).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trs_states_have_zero_bloch() {
        let lat = chain(8).unwrap();
        for state in [
            build_psi_m(&lat, 4).unwrap(),
            build_easy_axis(&lat, None).unwrap(),
        ] {
            for j in 0..8 {
                let b = site_bloch(&state, j).unwrap();
                assert!(b.iter().all(|x| x.abs() < 1e-13), "site {j}: {b:?}");
            }
        }
        // an asymmetric sector is still transverse-dark but z-polarized:
        // ⟨s^z_j⟩ = (N/2 - M)/N per site
        let tilted = build_psi_m(&lat, 3).unwrap();
        for j in 0..8 {
            let b = site_bloch(&tilted, j).unwrap();
            assert!(b[0].abs() < 1e-13 && b[1].abs() < 1e-13);
            assert!((b[2] - 0.25).abs() < 1e-13);
        }
    }

    #[test]
    fn sum_rules_on_random_state() {
        let lat = chain(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = StateVector::random(6, &mut rng).unwrap();
        let mut zz = 0.0;
        let mut pm = 0.0;
        for q in &lat.momenta {
            zz += correlator(&s, &lat, Component::Z, Component::Z, q).unwrap().re;
            pm += correlator(&s, &lat, Component::Plus, Component::Minus, q)
                .unwrap()
                .re;
        }
        let (sz, _) = sz_moments(&s).unwrap();
        assert!((zz - 6.0 / 4.0).abs() < 1e-12, "sum K^zz = {zz}");
        assert!((pm - (3.0 + sz)).abs() < 1e-12, "sum K^+- = {pm}");
    }

    #[test]
    fn diagonal_correlators_are_nonnegative() {
        let lat = chain(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = StateVector::random(6, &mut rng).unwrap();
        for q in &lat.momenta {
            let kpm = correlator(&s, &lat, Component::Plus, Component::Minus, q).unwrap();
            assert!(kpm.im.abs() < 1e-13);
            assert!(kpm.re >= -1e-13);
            let kzz = correlator(&s, &lat, Component::Z, Component::Z, q).unwrap();
            assert!(kzz.im.abs() < 1e-13);
            assert!(kzz.re >= -1e-13);
        }
    }

    #[test]
    fn fan_after_trs_measurement() {
        let n = 8;
        let lat = chain(n).unwrap();
        let psi = build_psi_m(&lat, 4).unwrap();
        let plus = branch_pair(&psi, 0).unwrap().plus.normalized().unwrap();
        // every unmeasured site: ⟨s^x_j⟩ η_j = N / (4(N-1))
        let expect = n as f64 / (4.0 * (n - 1) as f64);
        for j in 1..n {
            let v = site_expectation(&plus, j, SiteOp::Sx).unwrap().re * lat.eta[j];
            assert!((v - expect).abs() < 1e-12, "site {j}: {v} vs {expect}");
        }
        let so = staggered_order(&plus, &lat, Some(0)).unwrap();
        assert!((so - 2.0 * expect).abs() < 1e-12);
        // measured site fully polarized
        let b0 = site_bloch(&plus, 0).unwrap();
        assert!((b0[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn axis_diagnostics_rotation_covariance() {
        let lat = chain(8).unwrap();
        let psi = build_easy_axis(&lat, None).unwrap();
        let d0 = axis_diagnostics(&psi, &lat).unwrap();
        assert!(d0.ratio > 0.2, "easy-axis state should pin the axis");
        assert!(d0.angle.abs() < 1e-13, "K^{{--}} real positive: axis at 0");
        let theta = 0.3;
        let d1 = axis_diagnostics(&psi.rotate_z(theta), &lat).unwrap();
        assert!((d1.k_pm - d0.k_pm).abs() < 1e-12);
        assert!((d1.ratio - d0.ratio).abs() < 1e-12);
        let mut shift = d1.angle - d0.angle;
        while shift <= -std::f64::consts::FRAC_PI_2 {
            shift += std::f64::consts::PI;
        }
        while shift > std::f64::consts::FRAC_PI_2 {
            shift -= std::f64::consts::PI;
        }
        assert!((shift - theta).abs() < 1e-12, "angle shift {shift} vs {theta}");
    }

    #[test]
    fn free_axis_vs_pinned_axis() {
        let n = 8;
        let lat = chain(n).unwrap();
        // single-sector state: transverse axis free, K^{--}(Q) = 0 exactly
        let psi = build_psi_m(&lat, 4).unwrap();
        let dep = axis_diagnostics(&psi, &lat).unwrap();
        assert!(dep.ratio < 1e-14, "pre-measurement ratio {}", dep.ratio);
        assert!((dep.k_pm - 2.5).abs() < 1e-12); // (N-M)(M+1)/N
        // one measurement mixes neighboring sectors and pins the axis:
        // K^{--}(Q) = 1/4, K^{+-}(Q) = (N+1)/4, ratio = 1/(N+1)
        let plus = branch_pair(&psi, 0).unwrap().plus.normalized().unwrap();
        let dbr = axis_diagnostics(&plus, &lat).unwrap();
        assert!((dbr.k_pm - (n as f64 + 1.0) / 4.0).abs() < 1e-12);
        assert!((dbr.k_mm.re - 0.25).abs() < 1e-12);
        assert!(dbr.k_mm.im.abs() < 1e-13);
        assert!((dbr.ratio - 1.0 / (n as f64 + 1.0)).abs() < 1e-12);
        // a sector superposition pins the axis already before measuring
        let ax = build_easy_axis(&lat, None).unwrap();
        let dax = axis_diagnostics(&ax, &lat).unwrap();
        assert!(dax.ratio > 0.2, "easy-axis ratio {}", dax.ratio);
    }

    #[test]
    fn mixed_correlator_matches_weighted_sum() {
        let lat = chain(6).unwrap();
        let psi = build_psi_m(&lat, 3).unwrap();
        let pair = branch_pair(&psi, 2).unwrap();
        let pn = pair.plus.normalized().unwrap();
        let mn = pair.minus.normalized().unwrap();
        let q = lat.ordering_vector().to_vec();
        let mixed = correlator_mixed(
            &[(pair.p_plus, &pn), (pair.p_minus, &mn)],
            &lat,
            Component::Plus,
            Component::Minus,
            &q,
        )
        .unwrap();
        let direct = pair.p_plus
            * correlator(&pn, &lat, Component::Plus, Component::Minus, &q).unwrap()
            + pair.p_minus
                * correlator(&mn, &lat, Component::Plus, Component::Minus, &q).unwrap();
        assert!((mixed - direct).norm() < 1e-14);
        // ensemble value for a symmetric state: (N+1)/4
        assert!((mixed.re - 7.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn xy_components_match_ladder_combinations() {
        let lat = chain(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = StateVector::random(4, &mut rng).unwrap();
        let q = vec![1usize];
        // K^{xx} + K^{yy} = (K^{+-} + K^{-+})/2
        let kxx = correlator(&s, &lat, Component::X, Component::X, &q).unwrap();
        let kyy = correlator(&s, &lat, Component::Y, Component::Y, &q).unwrap();
        let kpm = correlator(&s, &lat, Component::Plus, Component::Minus, &q).unwrap();
        let kmp = correlator(&s, &lat, Component::Minus, Component::Plus, &q).unwrap();
        assert!(((kxx + kyy) - (kpm + kmp) / 2.0).norm() < 1e-13);
    }
}
