use proptest::prelude::*;
use unistoch_core::sample::{random_distribution, random_stochastic, seeded};
use unistoch_core::stochastic::{
    candidate_intermediate, is_permutation, markov_power, propagate, stochastic_inverse_classify,
    InverseClass,
};
use unistoch_core::{Error, ProbVector, RMatrix, Tolerance, TransitionMatrix};

const TAU: f64 = 1e-10;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn gamma_x(t: f64) -> RMatrix {
    let (c2, s2) = (t.cos().powi(2), t.sin().powi(2));
    RMatrix::from_row_slice(2, 2, &[c2, s2, s2, c2]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagation_keeps_distributions(seed in any::<u64>(), n in 1usize..=16) {
        let mut rng = seeded(seed, 0);
        let g = TransitionMatrix::new(random_stochastic(&mut rng, n), tol()).unwrap();
        let p0 = ProbVector::new(random_distribution(&mut rng, n), tol()).unwrap();
        let p = propagate(&g, &p0, tol()).unwrap();
        prop_assert!((p.values().iter().sum::<f64>() - 1.0).abs() <= TAU);
        prop_assert!(p.values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn markov_powers_add(seed in any::<u64>(), n in 1usize..=6, a in 0u32..6, b in 0u32..6) {
        let g = random_stochastic(&mut seeded(seed, 0), n);
        let whole = markov_power(&g, a + b, tol()).unwrap();
        let parts = &markov_power(&g, a, tol()).unwrap() * &markov_power(&g, b, tol()).unwrap();
        prop_assert!(whole.max_abs_diff(&parts) <= TAU);
    }

    #[test]
    fn intermediate_reconstructs(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = seeded(seed, 0);
        let g_t = TransitionMatrix::new(random_stochastic(&mut rng, n), tol()).unwrap();
        let g_tp = TransitionMatrix::new(random_stochastic(&mut rng, n), tol()).unwrap();
        match candidate_intermediate(&g_t, &g_tp, tol()) {
            Ok(r) => {
                let back = &r.candidate * g_tp.matrix();
                prop_assert!(back.max_abs_diff(g_t.matrix()) <= TAU);
                prop_assert!(r.max_column_sum_error <= TAU);
            }
            Err(Error::Singular { .. }) | Err(Error::Validation(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn only_permutations_have_stochastic_inverses(seed in any::<u64>(), n in 2usize..=8) {
        let g = random_stochastic(&mut seeded(seed, 0), n);
        prop_assume!(!is_permutation(&g, TAU));
        match stochastic_inverse_classify(&g, tol()) {
            Ok(c) => {
                prop_assert_eq!(c.class, InverseClass::InversePseudoStochastic);
                prop_assert!(c.inverse_min_entry < -TAU || c.inverse_max_column_sum_error > TAU);
            }
            Err(Error::Singular { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn gamma_x_intermediates_go_negative(t in 0.0f64..1.5, tp in 0.0f64..1.5) {
        let ratio = (2.0 * t).cos() / (2.0 * tp).cos();
        prop_assume!(ratio < -1.0 - 1e-6);
        let g_tp = TransitionMatrix::new(gamma_x(tp), tol()).unwrap();
        prop_assume!(g_tp.matrix().singular_values()[1] > 1e-6);
        let g_t = TransitionMatrix::new(gamma_x(t), tol()).unwrap();
        let r = candidate_intermediate(&g_t, &g_tp, tol()).unwrap();
        prop_assert!(!r.is_stochastic);
        prop_assert!((r.min_entry - (1.0 + ratio) / 2.0).abs() <= 1e-8);
    }
}

#[test]
fn all_small_permutations_are_both_stochastic() {
    let perms3 = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut mats: Vec<RMatrix> = perms3
        .iter()
        .map(|p| RMatrix::from_fn(3, 3, |i, j| if p[j] == i { 1.0 } else { 0.0 }))
        .collect();
    mats.push(RMatrix::identity(2));
    mats.push(RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap());
    for m in mats {
        let c = stochastic_inverse_classify(&m, tol()).unwrap();
        assert_eq!(c.class, InverseClass::PermutationBothStochastic);
        assert!(c.inverse_min_entry >= 0.0);
    }
}
