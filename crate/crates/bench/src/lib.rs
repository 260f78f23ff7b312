//! Fixtures shared by the benchmarks.

use gamma_lab::{numlin, sample, solve_fundamental, FundamentalPair, OperatorPair};

/// A seeded symmetrized pair together with its fundamental operators.
pub fn fixture(seed: u64, dim: usize) -> (OperatorPair, FundamentalPair) {
    let pair = sample::symmetrized_pair(&mut sample::rng(seed), dim);
    let fp = solve_fundamental(&pair, numlin::default_rank_tol(dim), 1e-10).expect("generated pairs solve");
    (pair, fp)
}
