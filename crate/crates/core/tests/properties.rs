use gamma_lab::dilation::build_sznagy;
use gamma_lab::fundop::transport_under_unitary;
use gamma_lab::model::dmp_check;
use gamma_lab::numlin::{self, ComplexVector};
use gamma_lab::seqop::{compose_window, structural_distance, FiniteVector, SeqOperator};
use gamma_lab::{identity_suite, sample, solve_fundamental};
use proptest::prelude::*;

fn random_vector(seed: u64, op: &SeqOperator, lo: i64, hi: i64) -> FiniteVector {
    let mut rng = sample::rng(seed);
    let layout = op.layout_in();
    let blocks = (lo..=hi).filter(|&i| layout.contains(i)).map(|i| {
        let d = layout.slot_dim(i);
        (i, ComplexVector::from_fn(d, |_, _| sample::complex_normal(&mut rng)))
    });
    FiniteVector::from_blocks(layout, blocks.collect::<Vec<_>>()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn banded_application_matches_dense_truncation(seed in any::<u64>(), dim in 1usize..5) {
        let pair = sample::symmetrized_pair(&mut sample::rng(seed), dim);
        let fp = solve_fundamental(&pair, numlin::default_rank_tol(dim), 1e-10).unwrap();
        let bundle = build_sznagy(&pair, &fp).unwrap();
        for op in [&bundle.t0, &bundle.u0] {
            let v = random_vector(seed ^ 1, op, -5, 5);
            let w = op.apply(&v).unwrap();
            let band = op.band();
            let dense = op.to_dense((-5 - band, 5 + band), (-5, 5));
            let expected = dense * v.window_coords(-5, 5);
            let got = w.window_coords(-5 - band, 5 + band);
            prop_assert!((expected - got).norm() <= 1e-12 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn adjoint_matches_inner_product(seed in any::<u64>(), dim in 1usize..5) {
        let pair = sample::symmetrized_pair(&mut sample::rng(seed), dim);
        let fp = solve_fundamental(&pair, numlin::default_rank_tol(dim), 1e-10).unwrap();
        let bundle = build_sznagy(&pair, &fp).unwrap();
        for op in [&bundle.t0, &bundle.u0, &bundle.tflat, &bundle.vflat] {
            let u = random_vector(seed ^ 2, op, -6, 6);
            let v = random_vector(seed ^ 3, &op.adjoint(), -6, 6);
            let lhs = op.apply(&u).unwrap().inner(&v);
            let rhs = u.inner(&op.adjoint_apply(&v).unwrap());
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + u.norm() * v.norm()));
        }
    }

    #[test]
    fn u0_is_unitary_structurally(seed in any::<u64>(), dim in 1usize..5) {
        let pair = sample::symmetrized_pair(&mut sample::rng(seed), dim);
        let fp = solve_fundamental(&pair, numlin::default_rank_tol(dim), 1e-10).unwrap();
        let u0 = build_sznagy(&pair, &fp).unwrap().u0;
        let id = SeqOperator::identity(u0.layout_in());
        let r = u0.radius();
        for prod in [compose_window(&u0.adjoint(), &u0, r).unwrap(), compose_window(&u0, &u0.adjoint(), r).unwrap()] {
            prop_assert!(structural_distance(&prod, &id).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn identities_hold_for_random_pairs(seed in any::<u64>(), dim in 1usize..9) {
        let pair = sample::symmetrized_pair(&mut sample::rng(seed), dim);
        let fp = solve_fundamental(&pair, numlin::default_rank_tol(dim), 1e-10).unwrap();
        prop_assert!(fp.solved);
        prop_assert!(fp.omega_f <= 1.0 + 1e-8 && fp.omega_fstar <= 1.0 + 1e-8);
        let report = identity_suite(&pair, &fp, 1e-9);
        prop_assert!(report.pass, "max identity residual {}", report.max);
    }

    #[test]
    fn fundamental_operator_transports_under_unitaries(seed in any::<u64>(), dim in 1usize..5) {
        let mut rng = sample::rng(seed);
        let pair = sample::symmetrized_pair(&mut rng, dim);
        let u = sample::random_unitary(&mut rng, dim);
        let report = transport_under_unitary(&pair, &u, 1e-9).unwrap();
        prop_assert!(report.singular_value_distance <= 1e-9);
        prop_assert!(report.intertwiner_residual <= 1e-9);
        prop_assert!(report.singular_value_distance_star <= 1e-9);
        prop_assert!(report.intertwiner_residual_star <= 1e-9);
    }

    #[test]
    fn numerical_radius_sandwich(seed in any::<u64>(), dim in 1usize..7) {
        let t = sample::gaussian_matrix(&mut sample::rng(seed), dim, dim);
        let w = numlin::numerical_radius(&t, numlin::NUMERICAL_RADIUS_ANGLE_TOL).unwrap();
        let norm = numlin::op_norm(&t);
        prop_assert!(numlin::spectral_radius(&t).unwrap() <= w + 1e-8);
        prop_assert!(0.5 * norm - 1e-8 <= w && w <= norm + 1e-8);
        // Re⟨Tx, x⟩ for random unit x never exceeds ω
        let mut rng = sample::rng(seed ^ 7);
        for _ in 0..16 {
            let x = ComplexVector::from_fn(dim, |_, _| sample::complex_normal(&mut rng)).normalize();
            prop_assert!(((&t * &x).dotc(&x)).norm() <= w + 1e-8);
        }
    }

    #[test]
    fn completion_of_defect_sandwich_is_contractive(seed in any::<u64>(), n1 in 1usize..5, n2 in 1usize..5) {
        let mut rng = sample::rng(seed);
        let t1 = sample::random_contraction(&mut rng, n1, n1);
        let t2 = sample::random_contraction(&mut rng, n2, n2);
        let c = sample::random_contraction(&mut rng, n1, n2);
        let d1 = numlin::psd_sqrt(&(numlin::identity(n1) - &t1 * t1.adjoint()), 1e-12).unwrap();
        let d2 = numlin::psd_sqrt(&(numlin::identity(n2) - t2.adjoint() * &t2), 1e-12).unwrap();
        let report = dmp_check(&t1, &t2, &(&d1 * &c * &d2), 1e-10).unwrap();
        prop_assert!(report.is_contraction);
        prop_assert!(report.c_norm.unwrap() <= 1.0 + 1e-8);
        prop_assert!(report.factorization_residual.unwrap() <= 1e-9);
    }
}
