use proptest::prelude::*;
use rand::Rng;
use unistoch_core::dynamics::family_from_constant_h;
use unistoch_core::gauge::{sh_gauge, PhaseMatrix};
use unistoch_core::matrix::named;
use unistoch_core::sample::{
    haar_unitary, random_density, random_hermitian, random_phases, random_theta, seeded,
};
use unistoch_core::symmetry::{
    check_antiunitary_form, check_dynamical_symmetry, check_wigner, noether_check, Classification,
    KindHint, SymmetryCandidate,
};
use unistoch_core::{
    c, configuration_pvm, pvm_from_unitary, CMatrix, DensityMatrix, EvolutionOperator, Tolerance,
};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_is_always_a_symmetry(seed in any::<u64>(), n in 1usize..=8) {
        let theta = EvolutionOperator::new(random_theta(&mut seeded(seed, 0), n), tol()).unwrap();
        let v = SymmetryCandidate::unitary(CMatrix::identity(n), tol()).unwrap();
        let verdict = check_dynamical_symmetry(&v, &theta, tol()).unwrap();
        prop_assert!(verdict.holds);
        prop_assert_eq!(verdict.classification, Classification::Unitary);
    }

    #[test]
    fn verdict_ignores_phase_gauges(seed in any::<u64>(), n in 2usize..=6, perm_v in any::<bool>()) {
        let mut rng = seeded(seed, 0);
        let u = haar_unitary(&mut rng, n);
        let theta = EvolutionOperator::new(u, tol()).unwrap();
        let v = if perm_v {
            named::permutation(&random_permutation(&mut rng, n))
        } else {
            haar_unitary(&mut rng, n)
        };
        let v = SymmetryCandidate::unitary(v, tol()).unwrap();
        let phi = PhaseMatrix::new(random_phases(&mut rng, n)).unwrap();
        let gauged = sh_gauge(&theta, &phi).unwrap();
        let a = check_dynamical_symmetry(&v, &theta, tol()).unwrap();
        let b = check_dynamical_symmetry(&v, &gauged, tol()).unwrap();
        prop_assert_eq!(a.holds, b.holds);
    }

    #[test]
    fn antiunitary_verdicts_agree_with_conjugated_form(seed in any::<u64>(), n in 2usize..=5) {
        // A real symmetric H with V = diagonal signs gives V conj(Θ) V† = Θ exactly when V anticommutes
        // with the off-diagonal couplings, so build H on a bipartite chain.
        let mut rng = seeded(seed, 0);
        let couplings: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.2..2.0)).collect();
        let h = CMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j { c(couplings[i], 0.0) } else if j + 1 == i { c(couplings[j], 0.0) } else { c(0.0, 0.0) }
        });
        let t: f64 = rng.random_range(0.3..2.0);
        let theta = family_from_constant_h(&h, 1.0, tol()).unwrap().evolution_operator(t).unwrap();
        let signs: Vec<_> = (0..n).map(|k| c(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        let v = CMatrix::from_diagonal(&signs);
        let plain = SymmetryCandidate::unitary(v.clone(), tol()).unwrap();
        let verdict = check_dynamical_symmetry(&plain, &theta, tol()).unwrap();
        prop_assert!(verdict.holds);
        prop_assert_eq!(verdict.classification, Classification::AntiUnitary);
        // VΘV† = conj(Θ) is the same statement as conj(V) conj(Θ) conj(V)† = Θ.
        let redefined = SymmetryCandidate::new(v.conj(), KindHint::AntiUnitary, tol()).unwrap();
        prop_assert!(check_antiunitary_form(&redefined, &theta, tol()).unwrap().holds);
    }

    #[test]
    fn wigner_implies_dynamical(seed in any::<u64>(), n in 1usize..=5, commuting in any::<bool>()) {
        let mut rng = seeded(seed, 0);
        let h = random_hermitian(&mut rng, n, 3.0);
        let theta = family_from_constant_h(&h, 1.0, tol()).unwrap().evolution_operator(1.0).unwrap();
        let v = if commuting {
            family_from_constant_h(&h, 1.0, tol()).unwrap().at(0.37).unwrap()
        } else {
            haar_unitary(&mut rng, n)
        };
        let v = SymmetryCandidate::unitary(v, tol()).unwrap();
        let w = check_wigner(&v, &theta, 8, seed, tol()).unwrap();
        if commuting {
            prop_assert!(w.holds);
        }
        if w.holds {
            prop_assert!(check_dynamical_symmetry(&v, &theta, tol()).unwrap().holds);
        }
    }

    #[test]
    fn commuting_generators_are_conserved(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = seeded(seed, 0);
        let basis = haar_unitary(&mut rng, n);
        let spec_h: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let spec_g: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let in_basis = |d: &[f64]| &(&basis * &CMatrix::from_real_diagonal(d)) * &basis.adjoint();
        let (h, g) = (in_basis(&spec_h).hermitian_part(), in_basis(&spec_g).hermitian_part());
        let fam = family_from_constant_h(&h, 1.0, tol()).unwrap();
        let rho0 = DensityMatrix::new(random_density(&mut rng, n), tol()).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
        let loose = Tolerance::new(1e-9, 1e-6).unwrap();
        let report = noether_check(&g, &fam, &rho0, &times, loose).unwrap();
        prop_assert!(report.commutes);
        prop_assert!(report.max_drift <= 10.0 * loose.alg());
    }

    #[test]
    fn permutations_permute_the_configuration_pvm(seed in any::<u64>(), n in 1usize..=8) {
        let perm = random_permutation(&mut seeded(seed, 0), n);
        let v = named::permutation(&perm);
        let config = configuration_pvm(n).unwrap();
        let moved = pvm_from_unitary(&v, &config, tol()).unwrap();
        for i in 0..n {
            let hit = config.projectors().iter().filter(|p| p.max_abs_diff(&moved.projectors()[i]) <= 1e-12).count();
            prop_assert_eq!(hit, 1);
        }
    }
}

#[test]
fn haar_rotated_pvms_are_not_configuration_pvms() {
    let mut rng = seeded(4, 0);
    let config = configuration_pvm(3).unwrap();
    let moved = pvm_from_unitary(&haar_unitary(&mut rng, 3), &config, tol()).unwrap();
    let diagonal = moved
        .projectors()
        .iter()
        .all(|p| (0..3).all(|i| (0..3).all(|j| i == j || p[(i, j)].norm() <= 1e-8)));
    assert!(!diagonal);
}
