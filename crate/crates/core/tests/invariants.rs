use frobmod::construct;
use frobmod::frobenius::{self, TensorAlgebra};
use frobmod::hilbert_module::{self, HilbertModule};
use frobmod::instances;
use frobmod::linalg::{self, cr, Mat};
use proptest::prelude::*;

fn low_rank(seed: u64, rows: usize, cols: usize, rank: usize) -> Mat {
    let mut rng = linalg::rng_from_seed(seed);
    let left = linalg::random_matrix(&mut rng, rows, rank);
    let right = linalg::random_matrix(&mut rng, rank, cols);
    left * right
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..12, 1usize..12).prop_flat_map(|(r, c)| (Just(r), Just(c), 0..=r.min(c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_reconstructs_rank_deficient(seed in any::<u64>(), (r, c, k) in dims(), full in any::<bool>()) {
        let m = low_rank(seed, r, c, k);
        let svd = linalg::svd(&m, full);
        let kk = svd.s.len();
        prop_assert_eq!(kk, r.min(c));
        prop_assert!(svd.s.windows(2).all(|w| w[0] >= w[1] - 1e-12) && svd.s.iter().all(|&x| x >= -1e-12));
        let us = Mat::from_fn(r, kk, |i, j| svd.u[(i, j)] * cr(svd.s[j]));
        let back = us * svd.v.columns(0, kk).adjoint();
        prop_assert!(linalg::max_abs(&(back - &m)) <= 1e-10 * linalg::max_abs(&m).max(1.0));
        prop_assert_eq!(linalg::rank(&m), k);
    }

    #[test]
    fn pseudo_inverse_is_a_generalized_inverse(seed in any::<u64>(), (r, c, k) in dims()) {
        let m = low_rank(seed, r, c, k);
        let (p, rank) = linalg::pinv_and_rank(&m);
        prop_assert_eq!(rank, k);
        let scale = linalg::max_abs(&m).max(1.0);
        prop_assert!(linalg::max_abs(&(&m * &p * &m - &m)) <= 1e-9 * scale);
        prop_assert!(linalg::max_abs(&(&p * &m * &p - &p)) <= 1e-9 * linalg::max_abs(&p).max(1.0));
    }

    #[test]
    fn hermitian_eigen_is_ascending_and_reconstructs(seed in any::<u64>(), n in 1usize..16) {
        let mut rng = linalg::rng_from_seed(seed);
        let h = linalg::random_hermitian(&mut rng, n);
        let (vals, vecs) = linalg::hermitian_eigen(&h);
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = Mat::from_fn(n, n, |i, j| if i == j { cr(vals[i]) } else { cr(0.0) });
        prop_assert!(linalg::max_abs(&(&vecs * d * vecs.adjoint() - &h)) <= 1e-10 * linalg::max_abs(&h).max(1.0));
        prop_assert!(linalg::max_abs(&(vecs.adjoint() * &vecs - Mat::identity(n, n))) <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_instances_respect_budget_and_admit_a_quasi_basis(seed in 0u64..10_000, budget in 2usize..=6) {
        let inst = instances::random_instance(seed, budget).unwrap();
        let s = &inst.structure;
        prop_assert!(s.c().rep_dim() <= budget);
        let t = TensorAlgebra::new(s);
        let qb = frobenius::quasi_basis(s, &t).unwrap();
        prop_assert!(frobenius::reproduction_residual(s, &qb.pairs) <= 1e-9);
        // the index is central in C
        let index = frobenius::watatani_index(s, &qb, 1e-9).unwrap();
        for b in s.c().basis() {
            prop_assert!((&index * &b).dist(&(&b * &index)) <= 1e-9);
        }
    }

    #[test]
    fn index_scales_inversely_with_eps(seed in 0u64..10_000, lambda in 0.1f64..10.0) {
        let s = instances::random_instance(seed, 5).unwrap().structure;
        let scaled = s.scaled(lambda, 1e-9).unwrap();
        let index_of = |s: &frobmod::FrobeniusStructure| {
            let t = TensorAlgebra::new(s);
            frobenius::watatani_index(s, &frobenius::quasi_basis(s, &t).unwrap(), 1e-9).unwrap()
        };
        let (base, rescaled) = (index_of(&s), index_of(&scaled));
        let expected = s.c().from_coords(&(s.c().coords(&base) / cr(lambda)));
        prop_assert!(rescaled.dist(&expected) <= 1e-8 * base.norm().max(1.0));
        prop_assert!((scaled.eps_cb_norm() - lambda * s.eps_cb_norm()).abs() <= 1e-10 * lambda.max(1.0));
    }

    #[test]
    fn completion_module_is_valid_and_compacts_dims_agree(seed in 0u64..10_000, budget in 2usize..=5) {
        let s = instances::random_instance(seed, budget).unwrap().structure;
        let ce = construct::c_epsilon(&s).unwrap();
        let m = ce.module();
        let rebuilt = HilbertModule::new(m.base().clone(), m.dim(), m.action().to_vec(), m.gram().to_vec(), 1e-9);
        prop_assert!(rebuilt.is_ok());
        let span = hilbert_module::compacts_space(m, m).unwrap();
        prop_assert_eq!(hilbert_module::compacts_dim(m), span.dim());
        // C^ε has C's own dimension, and the corrupted gram is refused
        prop_assert_eq!(m.dim(), s.c().dim());
        let bad = HilbertModule::new(m.base().clone(), m.dim(), m.action().to_vec(), instances::indefinite_gram(m, seed), 1e-9);
        prop_assert_eq!(bad.err().map(|e| e.name()), Some("NotPositive"));
    }
}
