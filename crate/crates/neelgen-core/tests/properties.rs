//! Property-based invariants: identities that must hold on arbitrary
//! states, sites, momenta, and times — not just on the constructed
//! antiferromagnetic states.

use neelgen_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn random_state(n: usize) -> impl Strategy<Value = StateVector> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n).prop_filter_map(
        "state must normalize",
        move |pairs| {
            let amps = pairs
                .iter()
                .map(|&(re, im)| Complex64::new(re, im))
                .collect();
            StateVector::from_amplitudes(n, amps).unwrap().normalized().ok()
        },
    )
}

fn fourier_ops() -> impl Strategy<Value = FourierOp> {
    prop_oneof![
        Just(FourierOp::SPlus),
        Just(FourierOp::SMinus),
        Just(FourierOp::Sz)
    ]
}

fn site_op_of(f: FourierOp) -> SiteOp {
    match f {
        FourierOp::SPlus => SiteOp::SPlus,
        FourierOp::SMinus => SiteOp::SMinus,
        FourierOp::Sz => SiteOp::Sz,
    }
}

fn conjugate_of(f: FourierOp) -> FourierOp {
    match f {
        FourierOp::SPlus => FourierOp::SMinus,
        FourierOp::SMinus => FourierOp::SPlus,
        FourierOp::Sz => FourierOp::Sz,
    }
}

/// Wrap an angle into (-pi/2, pi/2] (axis angles are pi-periodic).
fn wrap_axis(mut x: f64) -> f64 {
    use std::f64::consts::PI;
    x %= PI;
    if x > PI / 2.0 {
        x -= PI;
    }
    if x <= -PI / 2.0 {
        x += PI;
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ladder_commutator_is_twice_sz(s in random_state(5), site in 0usize..5) {
        let pm = s.apply_site_op(site, SiteOp::SMinus).unwrap()
                  .apply_site_op(site, SiteOp::SPlus).unwrap();
        let mp = s.apply_site_op(site, SiteOp::SPlus).unwrap()
                  .apply_site_op(site, SiteOp::SMinus).unwrap();
        let commutator = pm.minus(&mp).unwrap();
        let twice_sz = s.apply_site_op(site, SiteOp::Sz).unwrap()
                        .scaled(Complex64::new(2.0, 0.0));
        prop_assert!(commutator.minus(&twice_sz).unwrap().norm() < 1e-12);
    }

    #[test]
    fn ladder_operators_are_nilpotent(s in random_state(5), site in 0usize..5) {
        for op in [SiteOp::SPlus, SiteOp::SMinus] {
            let twice = s.apply_site_op(site, op).unwrap().apply_site_op(site, op).unwrap();
            prop_assert!(twice.norm() < 1e-14);
        }
    }

    #[test]
    fn distinct_sites_commute(s in random_state(5), a in 0usize..5, b in 0usize..5) {
        prop_assume!(a != b);
        let xy = s.apply_site_op(a, SiteOp::Sx).unwrap().apply_site_op(b, SiteOp::Sy).unwrap();
        let yx = s.apply_site_op(b, SiteOp::Sy).unwrap().apply_site_op(a, SiteOp::Sx).unwrap();
        prop_assert!(xy.minus(&yx).unwrap().norm() < 1e-13);
    }

    #[test]
    fn fourier_op_is_phase_weighted_site_sum(
        s in random_state(6),
        iq in 0usize..6,
        op in fourier_ops(),
    ) {
        let lat = lattice::chain(6).unwrap();
        let q = lat.momenta[iq].clone();
        let fast = s.apply_fourier_op(&lat, &q, op).unwrap();
        let mut manual = StateVector::zero(6).unwrap();
        for j in 0..6 {
            let phase = Complex64::from_polar(1.0, lat.q_dot_r(iq, j));
            manual = manual
                .add_scaled(&s.apply_site_op(j, site_op_of(op)).unwrap(), phase)
                .unwrap();
        }
        manual = manual.scaled(Complex64::new(1.0 / 6f64.sqrt(), 0.0));
        prop_assert!(fast.minus(&manual).unwrap().norm() < 1e-12);
    }

    #[test]
    fn fourier_adjoint_is_conjugate_at_negated_momentum(
        a in random_state(6),
        b in random_state(6),
        iq in 0usize..6,
        op in fourier_ops(),
    ) {
        let lat = lattice::chain(6).unwrap();
        let q = lat.momenta[iq].clone();
        let nq = lat.momenta[lat.negate_momentum(iq)].clone();
        let lhs = inner(&a, &b.apply_fourier_op(&lat, &q, op).unwrap()).unwrap();
        let rhs = inner(&a.apply_fourier_op(&lat, &nq, conjugate_of(op)).unwrap(), &b).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn measurement_branches_resolve_identity(s in random_state(6), site in 0usize..6) {
        let pair = branch_pair(&s, site).unwrap();
        let sum = pair.plus.plus(&pair.minus).unwrap();
        prop_assert!(sum.minus(&s).unwrap().norm() < 1e-13);
        prop_assert!((pair.p_plus + pair.p_minus - 1.0).abs() < 1e-12);
        prop_assert!(pair.p_plus >= -1e-15 && pair.p_plus <= 1.0 + 1e-12);
        // projecting twice changes nothing
        if pair.p_plus > 1e-6 {
            let collapsed = pair.plus.normalized().unwrap();
            let again = branch_pair(&collapsed, site).unwrap();
            prop_assert!((again.p_plus - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn staggered_sector_measurements_are_unbiased(
        half in 2usize..=4,
        m_frac in 0.0..=1.0f64,
        site_frac in 0.0..1.0f64,
    ) {
        let n = 2 * half;
        let m = (m_frac * n as f64).round() as usize;
        let site = ((site_frac * n as f64) as usize).min(n - 1);
        let lat = lattice::chain(n).unwrap();
        let psi = build_psi_m(&lat, m).unwrap();
        let pair = branch_pair(&psi, site).unwrap();
        prop_assert!((pair.p_plus - 0.5).abs() < 1e-12);
        prop_assert!((pair.p_minus - 0.5).abs() < 1e-12);
    }

    #[test]
    fn correlator_sum_rules(s in random_state(6)) {
        let lat = lattice::chain(6).unwrap();
        let mut zz = 0.0;
        let mut pm = 0.0;
        for q in &lat.momenta {
            zz += correlator(&s, &lat, Component::Z, Component::Z, q).unwrap().re;
            pm += correlator(&s, &lat, Component::Plus, Component::Minus, q).unwrap().re;
        }
        let (sz, _) = sz_moments(&s).unwrap();
        prop_assert!((zz - 1.5).abs() < 1e-11);
        prop_assert!((pm - (3.0 + sz)).abs() < 1e-11);
    }

    #[test]
    fn trs_projection_accounts_all_weight(s in random_state(6)) {
        let lat = lattice::chain(6).unwrap();
        let dec = decompose_onto_trs(&s, &lat).unwrap();
        let total = dec.coherent_norm_sq() + dec.incoherent_norm_sq;
        prop_assert!((total - dec.total_norm_sq).abs() < 1e-12);
        prop_assert!(dec.incoherent_norm_sq > -1e-13);
    }

    #[test]
    fn trs_basis_projection_is_delta(half in 1usize..=4, m_frac in 0.0..=1.0f64) {
        let n = 2 * half;
        let m = (m_frac * n as f64).round() as usize;
        let lat = lattice::chain(n).unwrap();
        let psi = build_psi_m(&lat, m).unwrap();
        let dec = decompose_onto_trs(&psi, &lat).unwrap();
        for (&mm, c) in &dec.coefficients {
            let want = if mm == m { 1.0 } else { 0.0 };
            prop_assert!((c.norm() - want).abs() < 1e-12, "M'={} |c|={}", mm, c.norm());
        }
        prop_assert!(dec.incoherent_norm_sq.abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn evolution_forms_unitary_group(
        s in random_state(6),
        t1 in 0.0..1.5f64,
        t2 in 0.0..1.5f64,
    ) {
        let lat = lattice::chain(6).unwrap();
        let h = Hamiltonian::new(&lat, 1.0);
        let prop = EigenPropagator::new(&h).unwrap();
        let split = prop.evolve(&prop.evolve(&s, t1).unwrap(), t2).unwrap();
        let joint = prop.evolve(&s, t1 + t2).unwrap();
        prop_assert!(split.minus(&joint).unwrap().norm() < 1e-11);
        prop_assert!((joint.norm() - 1.0).abs() < 1e-11);
        prop_assert!((h.energy(&joint).unwrap() - h.energy(&s).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn evolution_conserves_sector_weights(s in random_state(6), t in 0.0..3.0f64) {
        let lat = lattice::chain(6).unwrap();
        let h = Hamiltonian::new(&lat, 0.8);
        let prop = EigenPropagator::new(&h).unwrap();
        let evolved = prop.evolve(&s, t).unwrap();
        for (b, a) in s.sector_decompose().iter().zip(evolved.sector_decompose()) {
            prop_assert!((b.1 - a.1).abs() < 1e-11);
        }
    }

    #[test]
    fn hamiltonian_routes_agree(s in random_state(6), dz in 0.0..2.0f64) {
        let lat = lattice::chain(6).unwrap();
        let h = Hamiltonian::new(&lat, dz);
        let real = h.apply(&s).unwrap();
        let momentum = h.apply_qspace(&s).unwrap();
        prop_assert!(real.minus(&momentum).unwrap().norm() < 1e-11);
    }

    #[test]
    fn axis_angle_rotation_covariance(theta in -3.0..3.0f64) {
        let lat = lattice::chain(8).unwrap();
        let psi = build_easy_axis(&lat, None).unwrap();
        let d0 = axis_diagnostics(&psi, &lat).unwrap();
        let d1 = axis_diagnostics(&psi.rotate_z(theta), &lat).unwrap();
        prop_assert!((d1.ratio - d0.ratio).abs() < 1e-11);
        prop_assert!((d1.k_pm - d0.k_pm).abs() < 1e-11);
        let shift = wrap_axis(d1.angle - d0.angle - theta);
        prop_assert!(shift.abs() < 1e-10, "shift residue {}", shift);
    }

    #[test]
    fn state_files_roundtrip_exactly(s in random_state(5)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.bin");
        write_state_file(&s, &path, &serde_json::json!({"k": 1})).unwrap();
        let (back, meta) = read_state_file(&path).unwrap();
        prop_assert_eq!(back.amplitudes(), s.amplitudes());
        prop_assert!(meta.is_some());
    }

    #[test]
    fn dispersion_momentum_inversion_and_scaling(
        half in 1usize..=32,
        scale in 0.5..3.0f64,
    ) {
        let n = 2 * half;
        let lat = lattice::chain(n).unwrap();
        let scaled = LatticeSpec::build(Geometry::Chain, &[n], &[(vec![1], scale)]).unwrap();
        let base = magnon_dispersion(&lat).unwrap();
        let omega = magnon_dispersion(&scaled).unwrap();
        for iq in 0..n {
            let ineg = lat.negate_momentum(iq);
            prop_assert!((base[iq] - base[ineg]).abs() < 1e-12);
            prop_assert!(base[iq] >= 0.0);
            prop_assert!((omega[iq] - scale * base[iq]).abs() < 1e-11);
        }
    }
}
