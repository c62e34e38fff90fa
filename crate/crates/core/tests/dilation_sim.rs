// SPDX-License-Identifier: Apache-2.0

use ito_dilation::chains::{exact_expectation, pairing_factor, simplex_volume, Chain, PoissonConfig};
use ito_dilation::dilation::{averaged_output, output_ledger, CompoundState, Sign};
use ito_dilation::linalg::{c, dagger, expm, max_abs_diff, vec_norm, C64, I};
use ito_dilation::{
    build_interaction, entanglement_rank, evolve_on_chain, large_number_sweep, output_measure,
    partial_dilation_propagator, project_output, semi_tensor_square, Execution, Hamiltonian,
    PartialDilationConfig,
};
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;

fn hermitian(d: usize) -> impl Strategy<Value = Hamiltonian> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d).prop_map(move |v| {
        let a = Array2::from_shape_vec((d, d), v.into_iter().map(|(r, i)| C64::new(r, i)).collect()).unwrap();
        Hamiltonian::new((&a + &dagger(&a)) * c(0.5)).unwrap()
    })
}

fn unit_vector(d: usize) -> impl Strategy<Value = Array1<C64>> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d)
        .prop_filter("nonzero", |v| v.iter().any(|(r, i)| r.abs() + i.abs() > 1e-3))
        .prop_map(|v| {
            let v = Array1::from_iter(v.into_iter().map(|(r, i)| C64::new(r, i)));
            let n = vec_norm(&v);
            v / c(n)
        })
}

fn vec_diff(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn chain_on_grid(points: &[u32], horizon: f64) -> Chain {
    Chain::new(points.iter().map(|&k| k as f64 * horizon / 64.0).collect(), horizon).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pattern_amplitudes_are_generator_powers(
        (h, psi) in (1usize..=4).prop_flat_map(|d| (hermitian(d), unit_vector(d))),
        points in proptest::collection::btree_set(0u32..64, 0..7),
        cut in 0u32..=64,
    ) {
        let points: Vec<u32> = points.into_iter().collect();
        let chain = chain_on_grid(&points, 1.0);
        let t = cut as f64 / 64.0;
        let state = evolve_on_chain(&build_interaction(&h), &chain, &psi, t, 16).unwrap();
        let active = chain.count_before(t);
        let l = h.generator();
        for p in 0..state.patterns() {
            let signs = state.signs(p);
            let expected = if signs[active..].contains(&Sign::Minus) {
                Array1::zeros(psi.len())
            } else {
                (0..state.minus_count(p)).fold(psi.clone(), |v, _| l.dot(&v))
            };
            prop_assert!(vec_diff(&state.amplitude(p), &expected) < 1e-12);
        }
    }

    #[test]
    fn output_depends_only_on_interaction_count(
        (h, psi) in (1usize..=3).prop_flat_map(|d| (hermitian(d), unit_vector(d))),
        a in proptest::collection::btree_set(0u32..64, 0..6),
        b in proptest::collection::btree_set(0u32..64, 0..6),
    ) {
        prop_assume!(a.len() == b.len());
        let g = build_interaction(&h);
        let sa = evolve_on_chain(&g, &chain_on_grid(&a.into_iter().collect::<Vec<_>>(), 1.0), &psi, 1.0, 16).unwrap();
        let sb = evolve_on_chain(&g, &chain_on_grid(&b.into_iter().collect::<Vec<_>>(), 1.0), &psi, 1.0, 16).unwrap();
        prop_assert_eq!(sa.amplitudes(), sb.amplitudes());
    }

    #[test]
    fn interaction_is_star_unitary((h, eps) in ((1usize..=8).prop_flat_map(hermitian), 0.0..1e-2f64)) {
        let g = build_interaction(&h);
        prop_assert!(g.star_unitarity_defect() <= 1e-12);
        let broken = ito_dilation::InteractionOperator::from_generator(h.generator() + Array2::<C64>::eye(h.dim()) * c(eps));
        prop_assert!((broken.star_unitarity_defect() - 2.0 * eps).abs() <= 1e-12);
    }

    #[test]
    fn output_measure_is_nu((h, lambda, nu) in ((1usize..=4).prop_flat_map(hermitian), 0.1..4.0f64, 0.0..10.0f64)) {
        let ledger = output_ledger(&h, lambda, nu).unwrap();
        prop_assert!((ledger.per_point_counting_coefficient - nu).abs() <= 1e-12 * nu.max(1.0));
        prop_assert!(ledger.scalar_defect <= 1e-12 * nu.max(1.0));
        prop_assert!(ledger.martingale_expectation <= 1e-12 * nu.max(1.0) / lambda);
    }
}

/// Reversing the order in which slots are interacted leaves the state
/// unchanged, since every slot applies the same `G`.
#[test]
fn slot_application_order_is_irrelevant() {
    let h = Hamiltonian::random(3, 4);
    let g = build_interaction(&h);
    let psi = Array1::from_elem(3, c(1.0 / 3f64.sqrt()));
    let chain = Chain::new(vec![0.1, 0.2, 0.5, 0.6, 0.9], 1.0).unwrap();
    let forward = evolve_on_chain(&g, &chain, &psi, 1.0, 16).unwrap();
    let mut reversed = CompoundState::embed(&chain, &psi, 16).unwrap();
    for slot in (0..chain.len()).rev() {
        reversed.apply(&g, slot).unwrap();
    }
    assert_eq!(forward.amplitudes(), reversed.amplitudes());
}

/// Closed-form Poisson sum over chains of length n ≤ 8, evaluated through the
/// compound state rather than the per-point factor.
#[test]
fn exhaustive_poisson_sum_matches_series() {
    for (h, nu, t) in [
        (Hamiltonian::pauli_z(), 0.1, 1.0),
        (Hamiltonian::random(3, 6), 0.05, 2.0),
        (Hamiltonian::pauli_y(), 0.1, 0.5),
    ] {
        let d = h.dim();
        let psi = Array1::from_elem(d, c(1.0 / (d as f64).sqrt()));
        let g = build_interaction(&h);
        let mean = 2.0 * nu * t;
        let mut total = Array1::<C64>::zeros(d);
        for n in 0..=8u32 {
            let times = (0..n).map(|k| t * (k as f64 + 0.5) / n as f64).collect();
            let chain = Chain::new(times, t).unwrap();
            let state = evolve_on_chain(&g, &chain, &psi, t, 16).unwrap();
            let weight = (-mean).exp() * simplex_volume(n, mean);
            total = total + project_output(&state, nu).unwrap() * c(weight);
        }
        let exact = exact_expectation(&h, t, nu, 25).unwrap().matrix.dot(&psi);
        assert!(vec_diff(&total, &exact) <= 1e-10, "{}", vec_diff(&total, &exact));
    }
}

#[test]
fn averaged_output_matches_propagator() {
    let h = Hamiltonian::pauli_z();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = array![c(s), c(s)];
    let cfg = PoissonConfig::new(1.0, 1.0, 100_000, 7).unwrap();
    let (mean, stderr) = averaged_output(&build_interaction(&h), &cfg, &psi, 16, Execution::default()).unwrap();
    let oracle = array![(-I).exp() * s, I.exp() * s];
    assert!(vec_diff(&mean, &oracle) <= 5.0 * stderr, "{} vs {stderr}", vec_diff(&mean, &oracle));
}

#[test]
fn per_point_factor_is_pairing_of_g() {
    let h = Hamiltonian::random(4, 10);
    let expected = Array2::<C64>::eye(4) + h.generator() * c(0.5);
    assert!(max_abs_diff(&pairing_factor(&h), &expected) < 1e-15);
}

#[test]
fn partial_dilation_grid() {
    for h in [Hamiltonian::pauli_z(), Hamiltonian::pauli_x(), Hamiltonian::random(3, 1)] {
        for lambda in [0.5, 1.0, 2.0] {
            for nu in [0.25, 1.0, 4.0] {
                let cfg = PartialDilationConfig::new(lambda, nu).unwrap();
                // ‖H‖t ≤ 2
                let t = 2.0 / h.spectral_norm();
                let v = partial_dilation_propagator(&h, &cfg, t, 25).unwrap();
                let oracle = expm(&h.matrix().mapv(|z| -I * cfg.effective_rate() * t * z));
                let err = max_abs_diff(&v, &oracle);
                assert!(err <= 1e-10, "lambda {lambda} nu {nu}: {err}");
            }
        }
    }
}

#[test]
fn balanced_partial_dilation_is_identity() {
    let h = Hamiltonian::random(4, 2);
    for nu in [0.25, 1.0, 4.0, 9.0] {
        let cfg = PartialDilationConfig::new(f64::sqrt(nu), nu).unwrap();
        let v = partial_dilation_propagator(&h, &cfg, 1.0, 25).unwrap();
        assert!(max_abs_diff(&v, &Array2::eye(4)) <= 1e-10, "nu {nu}");
    }
}

#[test]
fn output_measure_grid() {
    for h in [Hamiltonian::zero(2), Hamiltonian::pauli_z()] {
        for lambda in [0.5, 1.0, 2.0] {
            for nu in [0.25, 1.0, 4.0] {
                assert!((output_measure(&h, lambda, nu).unwrap() - nu).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn semi_tensor_square_expansion() {
    for seed in 0..5 {
        let h = Hamiltonian::random(3, seed);
        let sq = semi_tensor_square(&build_interaction(&h));
        assert!(sq.defect <= 1e-12);
    }
}

#[test]
fn entanglement_examples() {
    let h = Hamiltonian::random(3, 3);
    let g = build_interaction(&h);
    let chain = Chain::new(vec![0.4], 1.0).unwrap();
    for k in 0..3 {
        let v = h.eigenvector(k).unwrap();
        let s = evolve_on_chain(&g, &chain, &v, 1.0, 16).unwrap();
        assert_eq!(entanglement_rank(&s, 1e-10).unwrap(), 1);
    }
    let psi = Array1::from_elem(3, c(1.0 / 3f64.sqrt()));
    let s = evolve_on_chain(&g, &chain, &psi, 1.0, 16).unwrap();
    assert_eq!(entanglement_rank(&s, 1e-10).unwrap(), 2);
}

#[test]
fn large_number_fluctuation_decreases() {
    let rows = large_number_sweep(&Hamiltonian::pauli_z(), 1.0, &[1.0, 10.0, 100.0], 10_000, 5, Execution::default())
        .unwrap();
    for r in &rows {
        assert!(r.bias_within(5.0), "nu {}: bias {} stderr {}", r.nu, r.bias, r.stderr);
    }
    let (lo, hi) = (rows[0], rows[2]);
    let combined = (lo.fluctuation_stderr.powi(2) + hi.fluctuation_stderr.powi(2)).sqrt();
    assert!(lo.fluctuation - hi.fluctuation >= 3.0 * combined);
    assert!(rows.windows(2).all(|w| w[1].fluctuation < w[0].fluctuation));
}
