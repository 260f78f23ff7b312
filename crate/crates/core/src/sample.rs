//! Seeded random generators for matrices and commuting pairs.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::gamma::OperatorPair;
use crate::numlin::{self, c, ComplexMatrix};

pub type SeededRng = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im) / 2f64.sqrt()
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix,
/// with the phases of `R`'s diagonal folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    if n == 0 {
        return numlin::zeros(0, 0);
    }
    let g = gaussian_matrix(rng, n, n);
    let (q, r) = g.qr().unpack();
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                c(1.0, 0.0)
            }
        })
        .collect();
    q * numlin::diag(&phases)
}

pub fn unimodular<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Point of the open unit disc with uniformly distributed modulus.
pub fn disc_point<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r: f64 = rng.random_range(0.0..1.0);
    unimodular(rng) * r
}

/// Random contraction with operator norm drawn uniformly from `[0, 1)`.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, rows, cols);
    let norm = numlin::op_norm(&g);
    let target: f64 = rng.random_range(0.0..1.0);
    if norm == 0.0 {
        g
    } else {
        g.scale(target / norm)
    }
}

/// Probability that a diagonal slot of a generated pair is a Γ-unitary
/// slot (both factors unimodular), which makes the defect spaces
/// rank-deficient.
pub const UNITARY_SLOT_PROBABILITY: f64 = 0.1;

/// Two commuting contractions `T_i = Q D_i Q*` sharing a random unitary
/// eigenbasis.
pub fn commuting_contractions<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
) -> (ComplexMatrix, ComplexMatrix) {
    let q = random_unitary(rng, n);
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.random_bool(UNITARY_SLOT_PROBABILITY) {
            d1.push(unimodular(rng));
            d2.push(unimodular(rng));
        } else {
            d1.push(disc_point(rng));
            d2.push(disc_point(rng));
        }
    }
    let t1 = &q * numlin::diag(&d1) * q.adjoint();
    let t2 = &q * numlin::diag(&d2) * q.adjoint();
    (t1, t2)
}

pub fn commuting_unitaries<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    let q = random_unitary(rng, n);
    let d1: Vec<Complex64> = (0..n).map(|_| unimodular(rng)).collect();
    let d2: Vec<Complex64> = (0..n).map(|_| unimodular(rng)).collect();
    (
        &q * numlin::diag(&d1) * q.adjoint(),
        &q * numlin::diag(&d2) * q.adjoint(),
    )
}

/// Symmetrization `(T1 + T2, T1 T2)` of two random commuting contractions.
pub fn symmetrized_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> OperatorPair {
    let (t1, t2) = commuting_contractions(rng, n);
    OperatorPair::from_parts(&t1 + &t2, &t1 * &t2)
}

/// `(U1 + U2, U1 U2)` for random commuting unitaries.
pub fn gamma_unitary_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> OperatorPair {
    let (u1, u2) = commuting_unitaries(rng, n);
    OperatorPair::from_parts(&u1 + &u2, &u1 * &u2)
}

/// Random square matrix rescaled to the given numerical radius.
pub fn matrix_with_numerical_radius<R: Rng + ?Sized>(rng: &mut R, n: usize, omega: f64) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let w = numlin::numerical_radius(&g, numlin::NUMERICAL_RADIUS_ANGLE_TOL).unwrap_or(0.0);
    if w == 0.0 {
        g
    } else {
        g.scale(omega / w)
    }
}
