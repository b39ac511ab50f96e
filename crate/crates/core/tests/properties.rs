// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use weakinv_core::channels::random_channel;
use weakinv_core::entropy::{linear_entropy, renyi, von_neumann};
use weakinv_core::gkls::{invariant_rhs, random_model, rho_rhs};
use weakinv_core::invariants::{convexity_gap, covariance_matrix, pull_back, variance};
use weakinv_core::operator::{
    expectation, frobenius, matrix_function, spectral_decompose, trace_product,
};
use weakinv_core::{DensityMatrix, Hermitian, InvariantSet, KrausChannel, SeededRng};

fn conjugate(rho: &DensityMatrix, seed: u64) -> DensityMatrix {
    let ch = KrausChannel::unitary(SeededRng::new(seed).haar_unitary(rho.dim())).unwrap();
    ch.apply(rho).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn expectation_is_linear(seed in any::<u64>(), dim in 2usize..=8, a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let mut rng = SeededRng::new(seed);
        let (p, q, rho) = (rng.hermitian(dim), rng.hermitian(dim), rng.density(dim));
        let sum = Hermitian::new(p.scale(a).matrix() + q.scale(b).matrix()).unwrap();
        let lhs = expectation(&rho, &sum).unwrap();
        let rhs = a * expectation(&rho, &p).unwrap() + b * expectation(&rho, &q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn spectral_decomposition_reconstructs(seed in any::<u64>(), dim in 2usize..=16) {
        let h = SeededRng::new(seed).hermitian(dim);
        let d = spectral_decompose(&h).unwrap();
        prop_assert!(frobenius(&(d.reconstruct() - h.matrix())) <= 1e-10 * h.norm().max(1.0));
        prop_assert!(d.unitarity_defect() <= 1e-10);
        prop_assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn matrix_function_composes(seed in any::<u64>(), dim in 2usize..=8) {
        let h = SeededRng::new(seed).hermitian(dim);
        let once = matrix_function(&h, |x| (0.3 * x).exp()).unwrap();
        let twice = matrix_function(&once, f64::ln).unwrap();
        prop_assert!(frobenius(&(twice.scale(1.0 / 0.3).matrix() - h.matrix())) <= 1e-9 * h.norm().max(1.0));
    }

    #[test]
    fn adjoint_is_dual(seed in any::<u64>(), dim in 2usize..=5, env in 2usize..=4) {
        let ch = random_channel(dim, env, seed).unwrap();
        let mut rng = SeededRng::new(seed ^ 0x5eed);
        let (rho, q) = (rng.density(dim), rng.hermitian(dim));
        let forward = expectation(&ch.apply(&rho).unwrap(), &q).unwrap();
        let backward = expectation(&rho, &ch.adjoint_apply(&q).unwrap()).unwrap();
        prop_assert!((forward - backward).abs() <= 1e-10);
    }

    #[test]
    fn pulled_back_variance_grows(seed in any::<u64>(), dim in 2usize..=5, env in 2usize..=4) {
        let ch = random_channel(dim, env, seed).unwrap();
        let mut rng = SeededRng::new(seed.wrapping_add(1));
        let (rho, q) = (rng.density(dim), rng.hermitian(dim));
        let earlier = pull_back(&ch, &q).unwrap();
        let before = variance(&rho, &earlier).unwrap();
        let after = variance(&ch.apply(&rho).unwrap(), &q).unwrap();
        prop_assert!(after - before >= -1e-10);
        prop_assert!(convexity_gap(&ch, &q).unwrap() >= -1e-10);
    }

    #[test]
    fn unital_channels_do_not_lower_entropy(seed in any::<u64>(), dim in 2usize..=5, count in 1usize..=4) {
        let ch = KrausChannel::random_mixed_unitary(dim, count, seed).unwrap();
        let rho = SeededRng::new(!seed).density(dim);
        let out = ch.apply(&rho).unwrap();
        prop_assert!(von_neumann(&out).unwrap() - von_neumann(&rho).unwrap() >= -1e-10);
        for alpha in [0.5, 1.5, 2.0] {
            prop_assert!(renyi(&out, alpha).unwrap() - renyi(&rho, alpha).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn entropies_are_unitarily_invariant(seed in any::<u64>(), dim in 2usize..=6) {
        let rho = SeededRng::new(seed).density(dim);
        let moved = conjugate(&rho, seed.rotate_left(7));
        prop_assert!((von_neumann(&moved).unwrap() - von_neumann(&rho).unwrap()).abs() <= 1e-10);
        prop_assert!((renyi(&moved, 0.5).unwrap() - renyi(&rho, 0.5).unwrap()).abs() <= 1e-10);
        prop_assert!((linear_entropy(&moved) - linear_entropy(&rho)).abs() <= 1e-12);
    }

    #[test]
    fn linear_entropy_matches_collision_entropy(seed in any::<u64>(), dim in 2usize..=6) {
        let rho = SeededRng::new(seed).density(dim);
        let s2 = renyi(&rho, 2.0).unwrap();
        prop_assert!((linear_entropy(&rho) - (1.0 - (-s2).exp())).abs() <= 1e-12);
    }

    #[test]
    fn renyi_is_continuous_at_one(seed in any::<u64>(), dim in 2usize..=6) {
        let rho = SeededRng::new(seed).density(dim);
        let s = von_neumann(&rho).unwrap();
        prop_assert!((renyi(&rho, 1.0 + 1e-7).unwrap() - s).abs() <= 1e-5);
        prop_assert!((renyi(&rho, 1.0 + 1e-3).unwrap() - s).abs() <= 1e-2);
    }

    #[test]
    fn covariance_matrix_is_psd(seed in any::<u64>(), dim in 2usize..=6, count in 1usize..=5) {
        let mut rng = SeededRng::new(seed);
        let members = (0..count).map(|_| rng.hermitian(dim)).collect();
        let set = InvariantSet::new(dim, members).unwrap();
        let cov = covariance_matrix(&rng.density(dim), &set).unwrap();
        prop_assert!(cov.symmetry_defect() <= 1e-12);
        prop_assert!(cov.is_psd());
    }

    #[test]
    fn generator_pair_conserves_expectations(seed in any::<u64>(), dim in 2usize..=5, t in 0.0..2.0f64) {
        let model = random_model(dim, seed).unwrap();
        let mut rng = SeededRng::new(seed.wrapping_mul(3));
        let (rho, inv) = (rng.density(dim), rng.hermitian(dim));
        let drho = rho_rhs(&model, &rho, t).unwrap();
        let dinv = invariant_rhs(&model, &inv, t).unwrap();
        prop_assert!(drho.matrix().trace().norm() <= 1e-12);
        let total = trace_product(dinv.matrix(), rho.matrix()) + trace_product(inv.matrix(), drho.matrix());
        prop_assert!(total.norm() <= 1e-10 * (1.0 + inv.norm()));
    }
}
