use hypersis::hypergraph::{comembership, generate_random};
use hypersis::spectral::{evaluate_conditions, lambda_max, names};
use hypersis::{Hypergraph, InfectionFunction, Kernels, ModelParams, SizeSpec};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn dense_lambda(hg: &Hypergraph) -> f64 {
    let w = comembership(hg);
    let n = hg.node_count();
    let m = DMatrix::from_row_slice(n, n, &w.as_matrix().to_dense_vec());
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::MIN, f64::max)
}

fn power_lambda(hg: &Hypergraph) -> f64 {
    lambda_max(comembership(hg).as_matrix(), 1e-10).unwrap()
}

fn random_hypergraph(n: usize, seed: u64) -> Hypergraph {
    let sizes = vec![(2, n), (3, n / 2), (4, n / 4), (5, n / 8)];
    generate_random(n, &SizeSpec::new(sizes, seed)).unwrap()
}

#[test]
fn power_iteration_matches_dense_eigensolver() {
    for (n, seed) in [(10, 1), (25, 2), (40, 3), (60, 4), (100, 5), (100, 6)] {
        let hg = random_hypergraph(n, seed);
        let a = power_lambda(&hg);
        let b = dense_lambda(&hg);
        assert!((a - b).abs() <= 1e-8 * b, "n={n}: power {a} vs dense {b}");
    }
}

#[test]
fn jacobian_eigenvalue_is_linear_shift() {
    let hg = random_hypergraph(40, 11);
    let k = Kernels::Single(InfectionFunction::arctan());
    let params = ModelParams::new(0.3, 1.5).unwrap();
    let j = hypersis::meanfield::jacobian_at_zero(&hg, &k, params).unwrap();
    let n = hg.node_count();
    let jm = DMatrix::from_row_slice(n, n, &j.to_dense_vec());
    let top = SymmetricEigen::new(jm).eigenvalues.iter().copied().fold(f64::MIN, f64::max);
    let expected = 0.3 * std::f64::consts::FRAC_PI_4 * dense_lambda(&hg) - 1.5;
    assert!((top - expected).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adding_an_edge_never_lowers_lambda(seed in 0u64..10_000, picks in prop::collection::vec(0usize..30, 2..=5)) {
        let hg = random_hypergraph(30, seed);
        let mut edge = picks;
        edge.sort_unstable();
        edge.dedup();
        prop_assume!(edge.len() >= 2);
        let bigger = hg.with_edge(edge).unwrap();
        prop_assert!(power_lambda(&bigger) >= power_lambda(&hg) * (1.0 - 1e-9));
    }

    #[test]
    fn concave_critical_betas_are_ordered(seed in 0u64..10_000, scale in 0.2f64..4.0, cap in 1u32..5) {
        let hg = random_hypergraph(30, seed);
        let params = ModelParams::new(0.1, 1.0).unwrap();
        for f in [
            InfectionFunction::arctan(),
            InfectionFunction::log_one_plus(scale).unwrap(),
            InfectionFunction::saturating_min(cap).unwrap(),
            InfectionFunction::identity(),
        ] {
            let strict = f.fprime_zero().unwrap() > f.f_one();
            let r = evaluate_conditions(&hg, &Kernels::Single(f), params).unwrap();
            let integer = r.critical_beta(names::MF_INTEGER).unwrap();
            let commuted = r.critical_beta(names::MF_COMMUTED).unwrap();
            prop_assert!(integer >= commuted);
            if strict {
                prop_assert!(integer > commuted);
            }
        }
    }

    #[test]
    fn satisfied_iff_value_below_one(beta in 0.0f64..0.2, seed in 0u64..1000) {
        let hg = random_hypergraph(20, seed);
        let r = evaluate_conditions(&hg, &Kernels::Single(InfectionFunction::arctan()), ModelParams::new(beta, 1.0).unwrap()).unwrap();
        for c in r.conditions.iter().filter(|c| c.evaluable) {
            prop_assert_eq!(c.satisfied.unwrap(), c.value.unwrap() < 1.0);
            prop_assert!(c.critical_beta.unwrap() > 0.0);
        }
    }
}
