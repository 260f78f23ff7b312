//! Geometry of Γ and bΓ and the classification of commuting pairs.
//!
//! Γ is the image of the closed bidisc under `(z1, z2) -> (z1 + z2, z1 z2)`
//! and bΓ the image of the torus. Membership of a point `(s, p)` is decided
//! from the moduli of the two roots of `λ² - sλ + p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::{self, c, matrix_json, ComplexMatrix};
use crate::sample;

pub const DEFAULT_RADIAL_STEPS: usize = 20;
pub const DEFAULT_ANGULAR_STEPS: usize = 64;
const JOINT_SPECTRUM_ATTEMPTS: usize = 8;
const JOINT_SPECTRUM_SEED: u64 = 0x6a6f_696e_7473_7065;

/// A commuting pair `(S, P)` of square matrices of equal size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairJson", into = "PairJson")]
pub struct OperatorPair {
    pub s: ComplexMatrix,
    pub p: ComplexMatrix,
    pub commutator_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PairJson {
    #[serde(rename = "S", with = "matrix_json")]
    s: ComplexMatrix,
    #[serde(rename = "P", with = "matrix_json")]
    p: ComplexMatrix,
}

impl TryFrom<PairJson> for OperatorPair {
    type Error = Error;
    fn try_from(j: PairJson) -> Result<Self> {
        OperatorPair::new(j.s, j.p)
    }
}

impl From<OperatorPair> for PairJson {
    fn from(p: OperatorPair) -> Self {
        PairJson { s: p.s, p: p.p }
    }
}

/// `1e-10 · (1 + ‖S‖‖P‖)`
pub fn default_pair_tol(s: &ComplexMatrix, p: &ComplexMatrix) -> f64 {
    1e-10 * (1.0 + numlin::op_norm(s) * numlin::op_norm(p))
}

impl OperatorPair {
    /// Validates shapes, finiteness and commutation at the default pair
    /// tolerance.
    pub fn new(s: ComplexMatrix, p: ComplexMatrix) -> Result<Self> {
        let tol = default_pair_tol(&s, &p);
        Self::with_tolerance(s, p, tol)
    }

    pub fn with_tolerance(s: ComplexMatrix, p: ComplexMatrix, tol: f64) -> Result<Self> {
        let n = numlin::require_square(&s, "S")?;
        numlin::require_square(&p, "P")?;
        if p.nrows() != n {
            return Err(Error::ShapeMismatch(format!(
                "S is {n}x{n} but P is {}x{}",
                p.nrows(),
                p.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidInput("pair dimension must be positive".into()));
        }
        if !numlin::is_finite(&s) || !numlin::is_finite(&p) {
            return Err(Error::InvalidInput("non-finite entries".into()));
        }
        let residual = numlin::commutator_norm(&s, &p);
        if residual > tol {
            return Err(Error::NotCommuting { residual });
        }
        Ok(OperatorPair {
            s,
            p,
            commutator_residual: residual,
        })
    }

    pub(crate) fn from_parts(s: ComplexMatrix, p: ComplexMatrix) -> Self {
        let residual = numlin::commutator_norm(&s, &p);
        OperatorPair {
            s,
            p,
            commutator_residual: residual,
        }
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// `(S*, P*)`
    pub fn adjoint(&self) -> OperatorPair {
        OperatorPair {
            s: self.s.adjoint(),
            p: self.p.adjoint(),
            commutator_residual: self.commutator_residual,
        }
    }

    /// `(U* S U, U* P U)`
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> OperatorPair {
        OperatorPair::from_parts(u.adjoint() * &self.s * u, u.adjoint() * &self.p * u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }
}

pub fn symmetrize(z1: Complex64, z2: Complex64) -> (Complex64, Complex64) {
    (z1 + z2, z1 * z2)
}

/// `(T1 + T2, T1 T2)` for commuting contractions.
pub fn symmetrize_pair(t1: &ComplexMatrix, t2: &ComplexMatrix, tol: f64) -> Result<OperatorPair> {
    numlin::require_square(t1, "T1")?;
    numlin::require_same_shape(t1, t2, "T1 and T2")?;
    let (n1, n2) = (numlin::op_norm(t1), numlin::op_norm(t2));
    if n1 > 1.0 + tol || n2 > 1.0 + tol {
        return Err(Error::NotContractions { left: n1, right: n2 });
    }
    let residual = numlin::commutator_norm(t1, t2);
    if residual > tol {
        return Err(Error::NotCommuting { residual });
    }
    OperatorPair::with_tolerance(t1 + t2, t1 * t2, tol.max(default_pair_tol(t1, t2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaMembership {
    pub in_gamma: bool,
    pub in_bgamma: bool,
    pub root_moduli: [f64; 2],
}

/// Roots of `λ² - sλ + p`, computed without cancellation.
pub fn symmetrization_roots(s: Complex64, p: Complex64) -> (Complex64, Complex64) {
    let disc = (s * s - 4.0 * p).sqrt();
    let plus = s + disc;
    let minus = s - disc;
    let q = if plus.norm() >= minus.norm() { plus } else { minus } / 2.0;
    if q.norm() == 0.0 {
        (q, q)
    } else {
        (q, p / q)
    }
}

pub fn point_in_gamma(s: Complex64, p: Complex64, tol: f64) -> GammaMembership {
    let (a, b) = symmetrization_roots(s, p);
    let (ma, mb) = (a.norm(), b.norm());
    let big = ma.max(mb);
    let small = ma.min(mb);
    GammaMembership {
        in_gamma: big <= 1.0 + tol,
        in_bgamma: small >= 1.0 - tol && big <= 1.0 + tol,
        root_moduli: [big, small],
    }
}

/// `ρ(S, P) = 2(I - P*P) - (S - S*P) - (S* - P*S)`, symmetrized.
pub fn rho_form(s: &ComplexMatrix, p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = numlin::require_square(s, "S")?;
    numlin::require_same_shape(s, p, "S and P")?;
    let sa = s.adjoint();
    let pa = p.adjoint();
    let rho = (numlin::identity(n) - &pa * p).scale(2.0) - (s - &sa * p) - (&sa - &pa * s);
    Ok(numlin::hermitian_part(&rho))
}

/// Smallest eigenvalue of `ρ(αS, α²P)`.
pub fn rho_min_eigenvalue(pair: &OperatorPair, alpha: Complex64) -> f64 {
    let s = &pair.s * alpha;
    let p = &pair.p * (alpha * alpha);
    rho_form(&s, &p).map(|r| numlin::lambda_min(&r)).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionEvidence {
    pub verdict: Verdict,
    /// Smallest eigenvalue of `ρ(αS, α²P)` over the α grid.
    pub min_eigenvalue: f64,
    /// `[re, im]` of the minimizing α.
    pub minimizing_alpha: [f64; 2],
    /// Joint-spectrum membership in Γ; `None` when the joint spectrum
    /// could not be computed.
    pub spectrum_in_gamma: Option<bool>,
    pub radial_steps: usize,
    pub angular_steps: usize,
    pub tol: f64,
}

/// Grid test of `ρ(αS, α²P) ≥ 0` over `α = r e^{iφ}` with `r` running up to
/// and including 1, combined with joint-spectrum membership in Γ.
pub fn is_gamma_contraction(
    pair: &OperatorPair,
    radial_steps: usize,
    angular_steps: usize,
    tol: f64,
) -> ContractionEvidence {
    let radial_steps = radial_steps.max(1);
    let angular_steps = angular_steps.max(1);
    let mut min = f64::INFINITY;
    let mut arg = c(0.0, 0.0);
    for k in 0..=radial_steps {
        let r = k as f64 / radial_steps as f64;
        let phis = if k == 0 { 1 } else { angular_steps };
        for j in 0..phis {
            let phi = std::f64::consts::TAU * j as f64 / angular_steps as f64;
            let alpha = Complex64::from_polar(r, phi);
            let l = rho_min_eigenvalue(pair, alpha);
            if l < min {
                min = l;
                arg = alpha;
            }
        }
    }
    let spectrum_in_gamma = joint_spectrum(pair, tol)
        .ok()
        .map(|pts| pts.iter().all(|&(s, p)| point_in_gamma(s, p, tol).in_gamma));
    let verdict = if min < -tol || spectrum_in_gamma == Some(false) {
        Verdict::No
    } else if spectrum_in_gamma.is_none() {
        Verdict::Inconclusive
    } else {
        Verdict::Yes
    };
    ContractionEvidence {
        verdict,
        min_eigenvalue: min,
        minimizing_alpha: [arg.re, arg.im],
        spectrum_in_gamma,
        radial_steps,
        angular_steps,
        tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub s: [f64; 2],
    pub p: [f64; 2],
    pub in_gamma: bool,
    pub in_bgamma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaClassification {
    pub is_gamma_contraction: ContractionEvidence,
    pub is_gamma_unitary: Verdict,
    pub is_gamma_isometry: Verdict,
    pub joint_spectrum: Option<Vec<SpectrumPoint>>,
    pub norm_s: f64,
    pub norm_p: f64,
    pub spectral_radius_s: f64,
    /// `‖P*P - I‖`
    pub isometry_residual: f64,
    /// `‖PP* - I‖`
    pub coisometry_residual: f64,
    /// `‖S - S*P‖`
    pub symmetry_residual: f64,
    pub tol: f64,
}

pub fn classify_pair(pair: &OperatorPair, tol: f64) -> GammaClassification {
    let n = pair.dim();
    let id = numlin::identity(n);
    let pa = pair.p.adjoint();
    let iso = numlin::op_norm(&(&pa * &pair.p - &id));
    let coiso = numlin::op_norm(&(&pair.p * &pa - &id));
    let sym = numlin::op_norm(&(&pair.s - pair.s.adjoint() * &pair.p));
    let rs = numlin::spectral_radius(&pair.s).unwrap_or(f64::NAN);
    let radius_ok = rs <= 2.0 + tol;
    let isometry = iso <= tol && sym <= tol && radius_ok;
    let unitary = isometry && coiso <= tol;
    let joint = joint_spectrum(pair, tol).ok().map(|pts| {
        pts.into_iter()
            .map(|(s, p)| {
                let m = point_in_gamma(s, p, tol);
                SpectrumPoint {
                    s: [s.re, s.im],
                    p: [p.re, p.im],
                    in_gamma: m.in_gamma,
                    in_bgamma: m.in_bgamma,
                }
            })
            .collect()
    });
    GammaClassification {
        is_gamma_contraction: is_gamma_contraction(
            pair,
            DEFAULT_RADIAL_STEPS,
            DEFAULT_ANGULAR_STEPS,
            tol,
        ),
        is_gamma_unitary: Verdict::from_bool(unitary),
        is_gamma_isometry: Verdict::from_bool(isometry),
        joint_spectrum: joint,
        norm_s: numlin::op_norm(&pair.s),
        norm_p: numlin::op_norm(&pair.p),
        spectral_radius_s: rs,
        isometry_residual: iso,
        coisometry_residual: coiso,
        symmetry_residual: sym,
        tol,
    }
}

fn strictly_lower_max(m: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in (j + 1)..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

/// Joint spectrum of a commuting pair by common Schur triangularization.
///
/// The unitary comes from the Schur form of `S + γP` for a random `γ`; if
/// it fails to triangularize both `S` and `P` to within
/// `tol · (1 + ‖S‖ + ‖P‖)` another `γ` is drawn.
pub fn joint_spectrum(pair: &OperatorPair, tol: f64) -> Result<Vec<(Complex64, Complex64)>> {
    let mut rng = sample::rng(JOINT_SPECTRUM_SEED);
    let scale = 1.0 + numlin::op_norm(&pair.s) + numlin::op_norm(&pair.p);
    for _ in 0..JOINT_SPECTRUM_ATTEMPTS {
        let gamma = sample::complex_normal(&mut rng);
        let (q, _) = numlin::schur(&(&pair.s + &pair.p * gamma));
        let ts = q.adjoint() * &pair.s * &q;
        let tp = q.adjoint() * &pair.p * &q;
        if strictly_lower_max(&ts).max(strictly_lower_max(&tp)) <= tol * scale {
            return Ok((0..pair.dim()).map(|i| (ts[(i, i)], tp[(i, i)])).collect());
        }
    }
    Err(Error::TriangularizationFailed {
        attempts: JOINT_SPECTRUM_ATTEMPTS,
    })
}

/// Scalar polynomial `Σ c_{ij} s^i p^j` in two variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial2 {
    pub terms: Vec<((usize, usize), Complex64)>,
}

impl Polynomial2 {
    pub fn eval(&self, s: Complex64, p: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|&((i, j), coef)| coef * s.powu(i as u32) * p.powu(j as u32))
            .sum()
    }

    pub fn eval_pair(&self, pair: &OperatorPair) -> ComplexMatrix {
        let n = pair.dim();
        let mut out = numlin::zeros(n, n);
        for &((i, j), coef) in &self.terms {
            out += (numlin::matrix_power(&pair.s, i) * numlin::matrix_power(&pair.p, j)) * coef;
        }
        out
    }

    /// Maximum of `|f(z1 + z2, z1 z2)|` over a `grid x grid` sample of the
    /// torus.
    pub fn torus_sup(&self, grid: usize) -> f64 {
        let grid = grid.max(1);
        let mut best: f64 = 0.0;
        for a in 0..grid {
            let z1 = Complex64::from_polar(1.0, std::f64::consts::TAU * a as f64 / grid as f64);
            for b in 0..grid {
                let z2 = Complex64::from_polar(1.0, std::f64::consts::TAU * b as f64 / grid as f64);
                let (s, p) = symmetrize(z1, z2);
                best = best.max(self.eval(s, p).norm());
            }
        }
        best
    }
}

/// `‖f(S,P)‖ / max_{bΓ grid} |f|`
pub fn polynomial_ratio(pair: &OperatorPair, f: &Polynomial2, grid: usize) -> f64 {
    let sup = f.torus_sup(grid);
    let norm = numlin::op_norm(&f.eval_pair(pair));
    if sup == 0.0 {
        if norm == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        norm / sup
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VonNeumannEvidence {
    pub verdict: Verdict,
    pub worst_ratio: f64,
    pub trials: usize,
    pub max_degree: usize,
    pub grid: usize,
}

/// Sampled von Neumann inequality over random scalar polynomials.
pub fn von_neumann_sample(
    pair: &OperatorPair,
    max_degree: usize,
    trials: usize,
    grid: usize,
    tol: f64,
    seed: u64,
) -> VonNeumannEvidence {
    let mut rng = sample::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut terms = Vec::new();
        for i in 0..=max_degree {
            for j in 0..=(max_degree - i) {
                terms.push(((i, j), sample::complex_normal(&mut rng)));
            }
        }
        worst = worst.max(polynomial_ratio(pair, &Polynomial2 { terms }, grid));
    }
    VonNeumannEvidence {
        verdict: Verdict::from_bool(worst <= 1.0 + tol),
        worst_ratio: worst,
        trials,
        max_degree,
        grid,
    }
}

/// Principal square root by the Schur method.
///
/// Eigenvalues on the open negative real axis are rejected. Zero
/// eigenvalues are accepted as long as the triangular recurrence stays
/// solvable.
pub fn principal_sqrt(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let n = numlin::require_square(m, "sqrt input")?;
    if n == 0 {
        return Ok(numlin::zeros(0, 0));
    }
    let scale = numlin::op_norm(m).max(1.0);
    let (q, t) = numlin::schur(m);
    let mut r = numlin::zeros(n, n);
    for i in 0..n {
        let l = t[(i, i)];
        if l.re < 0.0 && l.im.abs() <= tol * scale && l.norm() > tol * scale {
            return Err(Error::SqrtFailed(format!(
                "eigenvalue {l} lies on the negative real axis"
            )));
        }
        r[(i, i)] = if l.norm() <= tol * scale { c(0.0, 0.0) } else { l.sqrt() };
    }
    for d in 1..n {
        for i in 0..(n - d) {
            let j = i + d;
            let mut num = t[(i, j)];
            for k in (i + 1)..j {
                num -= r[(i, k)] * r[(k, j)];
            }
            let den = r[(i, i)] + r[(j, j)];
            if den.norm() <= tol.sqrt() * scale.sqrt() {
                if num.norm() > tol * scale {
                    return Err(Error::SqrtFailed(
                        "repeated zero eigenvalue with a nontrivial Jordan block".into(),
                    ));
                }
                r[(i, j)] = c(0.0, 0.0);
            } else {
                r[(i, j)] = num / den;
            }
        }
    }
    Ok(&q * r * q.adjoint())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decomposition {
    Factors {
        t1: ComplexMatrix,
        t2: ComplexMatrix,
        /// `‖T1 + T2 - S‖ + ‖T1 T2 - P‖`
        residual: f64,
    },
    Inconclusive {
        /// `‖RS - SR‖` and `‖RP - PR‖` for the principal root `R`.
        commutator_residuals: [f64; 2],
    },
}

/// Tries to write `(S, P) = (T1 + T2, T1 T2)` using the principal square
/// root `R` of `S² - 4P`: `T1 = (S + R)/2`, `T2 = (S - R)/2`.
pub fn decompose_symmetrization(pair: &OperatorPair, tol: f64) -> Result<Decomposition> {
    let disc = &pair.s * &pair.s - pair.p.scale(4.0);
    let r = principal_sqrt(&disc, tol)?;
    let rs = numlin::commutator_norm(&r, &pair.s);
    let rp = numlin::commutator_norm(&r, &pair.p);
    if rs > tol || rp > tol {
        return Ok(Decomposition::Inconclusive {
            commutator_residuals: [rs, rp],
        });
    }
    let t1 = (&pair.s + &r).scale(0.5);
    let t2 = (&pair.s - &r).scale(0.5);
    let residual =
        numlin::op_norm(&(&t1 + &t2 - &pair.s)) + numlin::op_norm(&(&t1 * &t2 - &pair.p));
    Ok(Decomposition::Factors { t1, t2, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{cr, diag, scalar};

    fn pair(s: ComplexMatrix, p: ComplexMatrix) -> OperatorPair {
        OperatorPair::new(s, p).unwrap()
    }

    #[test]
    fn symmetrize_examples() {
        assert_eq!(symmetrize(cr(1.0), cr(1.0)), (cr(2.0), cr(1.0)));
        assert_eq!(symmetrize(cr(0.0), cr(0.0)), (cr(0.0), cr(0.0)));
        let t1 = diag(&[cr(0.5), c(0.0, 0.5)]);
        let t2 = diag(&[cr(1.0 / 3.0), cr(1.0 / 3.0)]);
        let p = symmetrize_pair(&t1, &t2, 1e-12).unwrap();
        let s_expected = diag(&[cr(5.0 / 6.0), c(1.0 / 3.0, 0.5)]);
        let p_expected = diag(&[cr(1.0 / 6.0), c(0.0, 1.0 / 6.0)]);
        assert!(numlin::op_norm(&(p.s - s_expected)) < 1e-15);
        assert!(numlin::op_norm(&(p.p - p_expected)) < 1e-15);
    }

    #[test]
    fn symmetrize_pair_errors() {
        let a = numlin::from_real_rows(&[&[0.0, 0.5], &[0.0, 0.0]]);
        let b = numlin::from_real_rows(&[&[0.0, 0.0], &[0.5, 0.0]]);
        assert!(matches!(
            symmetrize_pair(&a, &b, 1e-12),
            Err(Error::NotCommuting { .. })
        ));
        let big = scalar(cr(1.5));
        assert!(matches!(
            symmetrize_pair(&big, &scalar(cr(0.0)), 1e-12),
            Err(Error::NotContractions { .. })
        ));
    }

    #[test]
    fn point_membership_examples() {
        let m = point_in_gamma(cr(2.0), cr(1.0), 1e-9);
        assert!(m.in_gamma && m.in_bgamma);
        let m = point_in_gamma(cr(1.0), cr(0.0), 1e-9);
        assert!(m.in_gamma && !m.in_bgamma);
        let m = point_in_gamma(cr(3.0), cr(1.0), 1e-9);
        assert!(!m.in_gamma);
        assert!((m.root_moduli[0] - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rho_form_examples() {
        let r = rho_form(&scalar(cr(2.0)), &scalar(cr(1.0))).unwrap();
        assert!(r[(0, 0)].norm() < 1e-15);
        let r = rho_form(&scalar(cr(0.0)), &scalar(cr(0.0))).unwrap();
        assert_eq!(r[(0, 0)], cr(2.0));
        let r = rho_form(&scalar(cr(1.0)), &scalar(cr(0.0))).unwrap();
        assert!(r[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn gamma_contraction_examples() {
        let mut rng = sample::rng(7);
        for n in 1..5 {
            let p = sample::symmetrized_pair(&mut rng, n);
            let ev = is_gamma_contraction(&p, 20, 64, 1e-8);
            assert_eq!(ev.verdict, Verdict::Yes, "{ev:?}");
        }
        let ev = is_gamma_contraction(&pair(scalar(cr(3.0)), scalar(cr(0.0))), 20, 64, 1e-8);
        assert_eq!(ev.verdict, Verdict::No);
        // ρ(3α, 0) = 2 - 6 Re α is most negative at α = 1.
        assert!((ev.min_eigenvalue + 4.0).abs() < 1e-12);
        assert!((ev.minimizing_alpha[0] - 1.0).abs() < 1e-12);
        let ev = is_gamma_contraction(&pair(scalar(cr(2.0)), scalar(cr(1.0))), 20, 64, 1e-8);
        assert_eq!(ev.verdict, Verdict::Yes);
        assert!(ev.min_eigenvalue.abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        let cl = classify_pair(&pair(scalar(cr(2.0)), scalar(cr(1.0))), 1e-8);
        assert_eq!(cl.is_gamma_unitary, Verdict::Yes);
        let mut rng = sample::rng(11);
        let gu = sample::gamma_unitary_pair(&mut rng, 4);
        let cl = classify_pair(&gu, 1e-8);
        assert_eq!(cl.is_gamma_unitary, Verdict::Yes);
        assert!(cl.joint_spectrum.unwrap().iter().all(|p| p.in_bgamma));
        let cl = classify_pair(&pair(scalar(cr(1.0)), scalar(cr(0.0))), 1e-8);
        assert_eq!(cl.is_gamma_unitary, Verdict::No);
        assert_eq!(cl.is_gamma_contraction.verdict, Verdict::Yes);
    }

    #[test]
    fn joint_spectrum_examples() {
        let s = diag(&[cr(0.5), c(0.0, 1.0)]);
        let p = diag(&[cr(0.25), c(-0.5, 0.0)]);
        let mut js = joint_spectrum(&pair(s, p), 1e-10).unwrap();
        js.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
        assert!((js[0].0 - c(0.0, 1.0)).norm() < 1e-12 && (js[0].1 - cr(-0.5)).norm() < 1e-12);
        assert!((js[1].0 - cr(0.5)).norm() < 1e-12 && (js[1].1 - cr(0.25)).norm() < 1e-12);

        let js = joint_spectrum(&pair(scalar(cr(2.0)), scalar(cr(1.0))), 1e-10).unwrap();
        assert_eq!(js, vec![(cr(2.0), cr(1.0))]);

        let s = numlin::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let js = joint_spectrum(&pair(s, numlin::zeros(2, 2)), 1e-10).unwrap();
        for (s, p) in js {
            assert!((s - cr(1.0)).norm() < 1e-6);
            assert_eq!(p, cr(0.0));
        }
    }

    #[test]
    fn von_neumann_examples() {
        let one = Polynomial2 {
            terms: vec![((0, 0), cr(1.0))],
        };
        let pp = Polynomial2 {
            terms: vec![((0, 1), cr(1.0))],
        };
        let ss = Polynomial2 {
            terms: vec![((1, 0), cr(1.0))],
        };
        let mut rng = sample::rng(3);
        let pr = sample::symmetrized_pair(&mut rng, 3);
        assert!((polynomial_ratio(&pr, &one, 16) - 1.0).abs() < 1e-12);
        assert!(polynomial_ratio(&pr, &pp, 16) <= 1.0 + 1e-12);
        let b = pair(scalar(cr(2.0)), scalar(cr(1.0)));
        assert!((polynomial_ratio(&b, &ss, 16) - 1.0).abs() < 1e-12);

        let ev = von_neumann_sample(&pr, 3, 20, 48, 1e-2, 5);
        assert_eq!(ev.verdict, Verdict::Yes, "{ev:?}");
        let bad = pair(scalar(cr(3.0)), scalar(cr(0.0)));
        let ev = von_neumann_sample(&bad, 1, 5, 32, 1e-6, 5);
        assert!(ev.worst_ratio > 1.0);
    }

    #[test]
    fn decompose_examples() {
        match decompose_symmetrization(&pair(scalar(cr(2.0)), scalar(cr(1.0))), 1e-10).unwrap() {
            Decomposition::Factors { t1, t2, .. } => {
                assert!((t1[(0, 0)] - cr(1.0)).norm() < 1e-12);
                assert!((t2[(0, 0)] - cr(1.0)).norm() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        match decompose_symmetrization(&pair(scalar(cr(0.0)), scalar(cr(-1.0))), 1e-10).unwrap() {
            Decomposition::Factors { t1, t2, .. } => {
                assert!((t1[(0, 0)] - cr(1.0)).norm() < 1e-12);
                assert!((t2[(0, 0)] - cr(-1.0)).norm() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        // The symmetrize_pair example comes back with the factors swapped in
        // the second slot: the principal root picks 1/3 - i/2 there.
        let t1 = diag(&[cr(0.5), c(0.0, 0.5)]);
        let t2 = diag(&[cr(1.0 / 3.0), cr(1.0 / 3.0)]);
        let p = symmetrize_pair(&t1, &t2, 1e-12).unwrap();
        match decompose_symmetrization(&p, 1e-10).unwrap() {
            Decomposition::Factors { t1: a, t2: b, residual } => {
                assert!(residual < 1e-12);
                for i in 0..2 {
                    let mut got = [a[(i, i)], b[(i, i)]];
                    let mut want = [t1[(i, i)], t2[(i, i)]];
                    got.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
                    want.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
                    assert!((got[0] - want[0]).norm() < 1e-12 && (got[1] - want[1]).norm() < 1e-12);
                }
            }
            other => panic!("{other:?}"),
        }
        // S² - 4P = -4 has no principal square root.
        assert!(matches!(
            decompose_symmetrization(&pair(scalar(cr(0.0)), scalar(cr(1.0))), 1e-10),
            Err(Error::SqrtFailed(_))
        ));
    }

    #[test]
    fn pair_json_roundtrip() {
        let text = r#"{"S":{"rows":1,"cols":1,"re":[[2.0]]},"P":{"rows":1,"cols":1,"re":[[1.0]],"im":[[0.0]]}}"#;
        let p: OperatorPair = serde_json::from_str(text).unwrap();
        assert_eq!(p.s[(0, 0)], cr(2.0));
        let back = serde_json::to_string(&p).unwrap();
        let again: OperatorPair = serde_json::from_str(&back).unwrap();
        assert_eq!(p, again);
        let noncommuting = r#"{"S":{"rows":2,"cols":2,"re":[[0,1],[0,0]]},"P":{"rows":2,"cols":2,"re":[[0,0],[1,0]]}}"#;
        assert!(serde_json::from_str::<OperatorPair>(noncommuting).is_err());
    }
}
