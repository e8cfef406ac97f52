use proptest::prelude::*;
use unistoch_core::algebra::{partial_trace_internal, tensor, tensor_factorization_error};
use unistoch_core::correspondence::gamma_from_theta;
use unistoch_core::dilation::{
    apply_conjugation_real, blockwise_gauge, dilate_trivial, gamma_from_kraus, kraus_from_theta,
    kraus_identity_error, realify, reconstruct_gamma, stinespring_unitary, KrausSet,
};
use unistoch_core::sample::{ginibre, haar_unitary, random_kraus, random_theta, seeded};
use unistoch_core::validate::is_unitary;
use unistoch_core::{
    configuration_pvm, pvm_from_unitary, CMatrix, EvolutionOperator, RMatrix, Tolerance,
};

const TAU: f64 = 1e-10;

fn tol() -> Tolerance {
    Tolerance::default()
}

/// `Γ_ij = tr(tr_I(Θ̃† (P_i ⊗ 1) Θ̃ (P_j ⊗ P_γ)))` evaluated without block extraction.
fn partial_trace_oracle(evolution: &CMatrix, n: usize, d: usize, p_gamma: &CMatrix) -> RMatrix {
    let config = configuration_pvm(n).unwrap();
    let one = CMatrix::identity(d);
    RMatrix::from_fn(n, n, |i, j| {
        let left = tensor(&config.projectors()[i], &one);
        let right = tensor(&config.projectors()[j], p_gamma);
        let inner = &(&(&evolution.adjoint() * &left) * evolution) * &right;
        partial_trace_internal(&inner, n, d).unwrap().trace().re
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kraus_identity_is_forced(seed in any::<u64>(), n in 1usize..=8) {
        let theta = EvolutionOperator::new(random_theta(&mut seeded(seed, 0), n), tol()).unwrap();
        prop_assert!(kraus_identity_error(kraus_from_theta(&theta).operators()) <= TAU);
    }

    #[test]
    fn kraus_matches_dictionary(seed in any::<u64>(), n in 1usize..=8) {
        let theta = EvolutionOperator::new(random_theta(&mut seeded(seed, 0), n), tol()).unwrap();
        let ks = kraus_from_theta(&theta);
        let g = gamma_from_kraus(&ks, &configuration_pvm(n).unwrap(), tol()).unwrap();
        prop_assert!(g.matrix().max_abs_diff(gamma_from_theta(&theta).matrix()) <= TAU);
    }

    #[test]
    fn trivial_dilations_reproduce_gamma(seed in any::<u64>(), n in 1usize..=4, d in 1usize..=4) {
        let mut rng = seeded(seed, 0);
        let theta = EvolutionOperator::new(random_theta(&mut rng, n), tol()).unwrap();
        let pvm = pvm_from_unitary(&haar_unitary(&mut rng, d), &configuration_pvm(d).unwrap(), tol()).unwrap();
        let want = gamma_from_theta(&theta);
        for gamma in [0, d - 1] {
            let ds = dilate_trivial(&theta, d, pvm.clone(), gamma, tol()).unwrap();
            let got = reconstruct_gamma(&ds, tol()).unwrap();
            prop_assert!(got.matrix().max_abs_diff(want.matrix()) <= TAU);
            let oracle = partial_trace_oracle(ds.evolution(), n, d, &pvm.projectors()[gamma]);
            prop_assert!(got.matrix().max_abs_diff(&oracle) <= TAU);
        }
    }

    #[test]
    fn blockwise_unitaries_keep_gamma(seed in any::<u64>(), n in 2usize..=4, d in 2usize..=3) {
        let mut rng = seeded(seed, 0);
        let theta = EvolutionOperator::new(haar_unitary(&mut rng, n), tol()).unwrap();
        let ds = dilate_trivial(&theta, d, configuration_pvm(d).unwrap(), 0, tol()).unwrap();
        let blocks: Vec<CMatrix> = (0..n * n).map(|_| haar_unitary(&mut rng, d)).collect();
        let moved = blockwise_gauge(&ds, &blocks, tol()).unwrap();
        let before = reconstruct_gamma(&ds, tol()).unwrap();
        let after = reconstruct_gamma(&moved, tol()).unwrap();
        prop_assert!(before.matrix().max_abs_diff(after.matrix()) <= TAU);
        prop_assert!(tensor_factorization_error(moved.evolution(), n, d).unwrap() > 1e-6);
    }

    #[test]
    fn stinespring_reconstructs_random_kraus(seed in any::<u64>(), n in 1usize..=4, k in 1usize..=4) {
        let ks = KrausSet::new(random_kraus(&mut seeded(seed, 0), n, k), tol()).unwrap();
        let ds = stinespring_unitary(&ks, tol()).unwrap();
        prop_assert!(is_unitary(ds.evolution(), TAU).unwrap().holds);
        let want = gamma_from_kraus(&ks, &configuration_pvm(n).unwrap(), tol()).unwrap();
        let got = reconstruct_gamma(&ds, tol()).unwrap();
        prop_assert!(got.matrix().max_abs_diff(want.matrix()) <= TAU);
    }

    #[test]
    fn stinespring_from_unitary_theta(seed in any::<u64>(), n in 1usize..=4) {
        let theta = EvolutionOperator::new(haar_unitary(&mut seeded(seed, 0), n), tol()).unwrap();
        let ds = stinespring_unitary(&kraus_from_theta(&theta), tol()).unwrap();
        prop_assert!(is_unitary(ds.evolution(), TAU).unwrap().holds);
        let got = reconstruct_gamma(&ds, tol()).unwrap();
        prop_assert!(got.matrix().max_abs_diff(gamma_from_theta(&theta).matrix()) <= TAU);
    }

    #[test]
    fn realify_is_a_star_homomorphism(seed in any::<u64>()) {
        let mut rng = seeded(seed, 0);
        let (a, b) = (ginibre(&mut rng, 3, 3), ginibre(&mut rng, 3, 3));
        prop_assert!(realify(&(&a * &b)).max_abs_diff(&(&realify(&a) * &realify(&b))) <= TAU);
        prop_assert!(realify(&(&a + &b)).max_abs_diff(&(&realify(&a) + &realify(&b))) <= TAU);
        prop_assert!(realify(&a.adjoint()).max_abs_diff(&realify(&a).transpose()) <= TAU);
        let u = realify(&haar_unitary(&mut rng, 3));
        prop_assert!((&u.transpose() * &u).max_abs_diff(&RMatrix::identity(6)) <= TAU);
        let k = apply_conjugation_real(&realify(&a)).unwrap();
        prop_assert!(k.max_abs_diff(&realify(&a.conj())) <= TAU);
    }
}

#[test]
fn bit_flip_stinespring() {
    let ks = KrausSet::bit_flip(0.3).unwrap();
    let ds = stinespring_unitary(&ks, tol()).unwrap();
    assert_eq!(ds.evolution().shape(), (4, 4));
    assert!(is_unitary(ds.evolution(), TAU).unwrap().holds);
    let g = reconstruct_gamma(&ds, tol()).unwrap();
    let want = RMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.3, 0.7]).unwrap();
    assert!(g.matrix().max_abs_diff(&want) <= TAU);
}
