use gamma_lab::gamma::{classify_pair, symmetrize_pair, OperatorPair, Verdict};
use gamma_lab::numlin::{self, cr};
use gamma_lab::{build_sznagy, identity_suite, sample, solve_fundamental};

fn scalar_pair(s: f64, p: f64) -> OperatorPair {
    OperatorPair::new(numlin::scalar(cr(s)), numlin::scalar(cr(p))).unwrap()
}

#[test]
fn symmetrization_of_commuting_contractions_is_gamma_contraction() {
    for seed in 0..20 {
        let mut rng = sample::rng(seed);
        let (t1, t2) = sample::commuting_contractions(&mut rng, 1 + seed as usize % 5);
        let pair = symmetrize_pair(&t1, &t2, 1e-12).unwrap();
        let c = classify_pair(&pair, 1e-9);
        assert_eq!(c.is_gamma_contraction.verdict, Verdict::Yes, "seed {seed}");
    }
}

#[test]
fn norm_of_s_above_two_is_rejected() {
    let c = classify_pair(&scalar_pair(3.0, 0.0), 1e-9);
    assert_eq!(c.is_gamma_contraction.verdict, Verdict::No);
    // ρ(3, 0) = 2 - 3 - 3
    assert!(c.is_gamma_contraction.min_eigenvalue <= -4.0 + 1e-12);
}

#[test]
fn sums_and_products_of_commuting_unitaries_are_gamma_unitaries() {
    for seed in 0..20 {
        let pair = sample::gamma_unitary_pair(&mut sample::rng(seed), 1 + seed as usize % 6);
        assert_eq!(classify_pair(&pair, 1e-9).is_gamma_unitary, Verdict::Yes, "seed {seed}");
    }
}

#[test]
fn gamma_unitary_has_zero_fundamental_operator() {
    let pair = scalar_pair(2.0, 1.0);
    let fp = solve_fundamental(&pair, numlin::default_rank_tol(1), 1e-10).unwrap();
    assert_eq!(fp.defect_p.rank, 0);
    assert_eq!(fp.defect_pstar.rank, 0);
    assert_eq!(fp.f.shape(), (0, 0));
    assert!(fp.residual_f == 0.0 && fp.residual_fstar == 0.0);
    assert!(identity_suite(&pair, &fp, 1e-12).pass);

    let bundle = build_sznagy(&pair, &fp).unwrap();
    assert_eq!(bundle.t0.layout_in().negative_slot_dim, 0);
    assert_eq!(bundle.t0.layout_in().positive_slot_dim, 0);
    assert_eq!(bundle.t0.block(0, 0), pair.s);
    assert_eq!(bundle.u0.block(0, 0), pair.p);
}
