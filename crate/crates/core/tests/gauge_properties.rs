use proptest::prelude::*;
use unistoch_core::correspondence::{
    born_rule, dictionary_rhs_between, evolve_density, expect_obs, gamma_from_theta,
};
use unistoch_core::dynamics::family_from_constant_h;
use unistoch_core::gauge::{fw_gauge, sh_gauge, transform_hamiltonian, FWTransform, PhaseMatrix};
use unistoch_core::pvm::pvm_from_unitary;
use unistoch_core::sample::{
    haar_unitary, random_density, random_distribution, random_hermitian, random_phases,
    random_state, random_theta, seeded,
};
use unistoch_core::validate::is_unitary;
use unistoch_core::{
    configuration_pvm, CMatrix, DensityMatrix, EvolutionOperator, Hamiltonian, StateVector,
    Tolerance,
};

const TAU: f64 = 1e-10;

fn tol() -> Tolerance {
    Tolerance::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phases_never_change_gamma(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = seeded(seed, 0);
        let theta = EvolutionOperator::new(random_theta(&mut rng, n), tol()).unwrap();
        let phi = PhaseMatrix::new(random_phases(&mut rng, n)).unwrap();
        let moved = sh_gauge(&theta, &phi).unwrap();
        let before = theta.matrix().modulus_squared();
        prop_assert!(gamma_from_theta(&moved).matrix().max_abs_diff(&before) <= TAU);
    }

    #[test]
    fn phases_compose_additively(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = seeded(seed, 0);
        let theta = EvolutionOperator::new(haar_unitary(&mut rng, n), tol()).unwrap();
        let p1 = PhaseMatrix::new(random_phases(&mut rng, n)).unwrap();
        let p2 = PhaseMatrix::new(random_phases(&mut rng, n)).unwrap();
        let twice = sh_gauge(&sh_gauge(&theta, &p1).unwrap(), &p2).unwrap();
        let once = sh_gauge(&theta, &p1.add(&p2).unwrap()).unwrap();
        prop_assert!(twice.matrix().max_abs_diff(once.matrix()) <= TAU);
    }

    #[test]
    fn frame_changes_preserve_physics(seed in any::<u64>(), n in 1usize..=8, t in 0.0f64..3.0) {
        let mut rng = seeded(seed, 0);
        let theta = EvolutionOperator::new(random_theta(&mut rng, n), tol()).unwrap().at(t);
        let rho0 = DensityMatrix::new(CMatrix::from_real_diagonal(&random_distribution(&mut rng, n)), tol()).unwrap();
        let obs = vec![random_hermitian(&mut rng, n, 2.0), random_hermitian(&mut rng, n, 2.0)];
        let psi = StateVector::new(random_state(&mut rng, n), tol()).unwrap();
        let g = random_hermitian(&mut rng, n, 2.0);
        let v = FWTransform::exp_generator(&g, tol()).unwrap();
        let bundle = fw_gauge(&theta, &rho0, &obs, Some(&psi), &v, t, tol()).unwrap();
        prop_assert!(bundle.holds);

        // Independent recomputation from the transformed bundle.
        let vt = v.at(t).unwrap();
        let v0 = v.at(0.0).unwrap();
        let config = configuration_pvm(n).unwrap();
        let moved_t = pvm_from_unitary(&vt.adjoint(), &config, tol()).unwrap();
        let moved_0 = pvm_from_unitary(&v0.adjoint(), &config, tol()).unwrap();
        let rho_t = evolve_density(&rho0, &theta, tol()).unwrap();
        let rho_v = DensityMatrix::new(bundle.rho.clone(), Tolerance::new(1e-9, 1e-6).unwrap()).unwrap();
        let theta_v = EvolutionOperator::new(bundle.theta.clone(), tol()).unwrap();
        for i in 0..n {
            let a = born_rule(&rho_t, &config, i).unwrap();
            let b = born_rule(&rho_v, &moved_t, i).unwrap();
            prop_assert!((a - b).abs() <= 1e-9);
            for j in 0..n {
                let g_ij = theta.matrix()[(i, j)].norm_sqr();
                let g_v = dictionary_rhs_between(&theta_v, &moved_t, &moved_0, i, j).unwrap();
                prop_assert!((g_ij - g_v).abs() <= 1e-9);
            }
        }
        for (a, a_v) in obs.iter().zip(&bundle.observables) {
            let before = expect_obs(a, &rho_t, tol()).unwrap();
            let after = expect_obs(a_v, &rho_v, tol()).unwrap();
            prop_assert!((before - after).abs() <= 1e-9);
        }
    }

    #[test]
    fn heisenberg_frame_removes_the_hamiltonian(seed in any::<u64>(), n in 1usize..=4, t in 0.0f64..3.0) {
        let h = random_hermitian(&mut seeded(seed, 0), n, 2.0);
        let fam = family_from_constant_h(&h, 1.0, tol()).unwrap();
        let ham = Hamiltonian::constant(h, tol()).unwrap();
        let step = 1e-5;
        let h_v = transform_hamiltonian(&ham, &FWTransform::adjoint_of(&fam), t, step).unwrap();
        prop_assert!(h_v.max_abs() <= 10.0 * step * step, "residual {}", h_v.max_abs());
    }
}

#[test]
fn some_phase_breaks_unitarity() {
    let mut rng = seeded(3, 0);
    let theta = EvolutionOperator::new(haar_unitary(&mut rng, 3), tol()).unwrap();
    let found = (0..20).any(|_| {
        let phi = PhaseMatrix::new(random_phases(&mut rng, 3)).unwrap();
        is_unitary(sh_gauge(&theta, &phi).unwrap().matrix(), TAU)
            .unwrap()
            .deviation
            > 100.0 * TAU
    });
    assert!(found);
}

#[test]
fn random_densities_fit_frames() {
    let mut rng = seeded(8, 0);
    let rho0 = DensityMatrix::new(random_density(&mut rng, 3), tol()).unwrap();
    let u = EvolutionOperator::new(haar_unitary(&mut rng, 3), tol()).unwrap();
    let v = FWTransform::constant(haar_unitary(&mut rng, 3), tol()).unwrap();
    let bundle = fw_gauge(&u, &rho0, &[], None, &v, 0.0, tol()).unwrap();
    assert!(bundle.holds);
}
