//! Fundamental operators.
//!
//! For a Γ-contraction `(S, P)` the equation `S - S*P = D_P X D_P` has a
//! unique solution `F` on the defect space of `P`, and `S* - SP* =
//! D_{P*} X D_{P*}` a unique solution `F_*` on the defect space of `P*`.
//! Both are stored in the coordinates of the defect bases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::OperatorPair;
use crate::numlin::{self, matrix_json, ComplexMatrix, DefectData};

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalPair {
    /// `r_P x r_P`, coordinates in `defect_p.basis`.
    pub f: ComplexMatrix,
    /// `r_{P*} x r_{P*}`, coordinates in `defect_pstar.basis`.
    pub fstar: ComplexMatrix,
    pub residual_f: f64,
    pub residual_fstar: f64,
    pub omega_f: f64,
    pub omega_fstar: f64,
    pub defect_p: DefectData,
    pub defect_pstar: DefectData,
    /// Both residuals are within `tol · (1 + ‖S‖)`. When false the pair
    /// violates a necessary condition for being a Γ-contraction.
    pub solved: bool,
    pub tol: f64,
}

impl FundamentalPair {
    /// `F` lifted to the ambient space.
    pub fn f_ambient(&self) -> ComplexMatrix {
        self.defect_p.lift(&self.f)
    }

    /// `F_*` lifted to the ambient space.
    pub fn fstar_ambient(&self) -> ComplexMatrix {
        self.defect_pstar.lift(&self.fstar)
    }

    pub fn report(&self) -> FundamentalReport {
        FundamentalReport {
            f: self.f.clone(),
            fstar: self.fstar.clone(),
            residual_f: self.residual_f,
            residual_fstar: self.residual_fstar,
            omega_f: self.omega_f,
            omega_fstar: self.omega_fstar,
            rank_p: self.defect_p.rank,
            rank_pstar: self.defect_pstar.rank,
            solved: self.solved,
            tol: self.tol,
        }
    }
}

/// JSON view of a [`FundamentalPair`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalReport {
    #[serde(rename = "F", with = "matrix_json")]
    pub f: ComplexMatrix,
    #[serde(rename = "Fstar", with = "matrix_json")]
    pub fstar: ComplexMatrix,
    pub residual_f: f64,
    pub residual_fstar: f64,
    pub omega_f: f64,
    pub omega_fstar: f64,
    pub rank_p: usize,
    pub rank_pstar: usize,
    pub solved: bool,
    pub tol: f64,
}

/// `Λ^{-1/2} Q* X Q Λ^{-1/2}` over the retained defect eigenpairs.
pub fn solve_in_defect_coords(x: &ComplexMatrix, defect: &DefectData) -> ComplexMatrix {
    let inv_roots: Vec<f64> = defect.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
    let scale = numlin::diag_real(&inv_roots);
    &scale * defect.basis.adjoint() * x * &defect.basis * &scale
}

/// `‖D F̃ D - X‖` with `F̃` the ambient lift of the coordinates.
pub fn fundamental_residual(x: &ComplexMatrix, coords: &ComplexMatrix, defect: &DefectData) -> f64 {
    let d = &defect.defect_op;
    numlin::op_norm(&(d * defect.lift(coords) * d - x))
}

pub fn solve_fundamental(pair: &OperatorPair, rank_tol: f64, tol: f64) -> Result<FundamentalPair> {
    let s = &pair.s;
    let p = &pair.p;
    let defect_p = numlin::defect(p, rank_tol)?;
    let defect_pstar = numlin::defect(&p.adjoint(), rank_tol)?;
    let x = s - s.adjoint() * p;
    let xstar = s.adjoint() - s * p.adjoint();
    let f = solve_in_defect_coords(&x, &defect_p);
    let fstar = solve_in_defect_coords(&xstar, &defect_pstar);
    let residual_f = fundamental_residual(&x, &f, &defect_p);
    let residual_fstar = fundamental_residual(&xstar, &fstar, &defect_pstar);
    let angle_tol = numlin::NUMERICAL_RADIUS_ANGLE_TOL;
    let omega_f = numlin::numerical_radius(&f, angle_tol)?;
    let omega_fstar = numlin::numerical_radius(&fstar, angle_tol)?;
    let bound = tol * (1.0 + numlin::op_norm(s));
    Ok(FundamentalPair {
        solved: residual_f <= bound && residual_fstar <= bound,
        f,
        fstar,
        residual_f,
        residual_fstar,
        omega_f,
        omega_fstar,
        defect_p,
        defect_pstar,
        tol,
    })
}

/// Residuals of the operator identities relating `F`, `F_*`, `S` and `P`
/// that make `T0 U0 = U0 T0` and `T0 = T0* U0` hold for the Sz.-Nagy
/// dilation. Each is evaluated with ambient lifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `D_P S = F D_P + F* D_P P`
    pub a1: f64,
    /// `D_P D_{P*} F_* - P* F_*^* = -F P* + F* D_P D_{P*}`
    pub a2: f64,
    /// `S D_{P*} = D_{P*} F_*^* + P D_{P*} F_*`
    pub a3: f64,
    /// `F* P* = P* F_*`
    pub a4: f64,
    /// `D_{P*} F_* = S* D_{P*} - D_P F P*`
    pub b1: f64,
    /// `P F D_P = F_*^* D_{P*} P`
    pub b2: f64,
    /// `P F P* + F_*^* D_{P*}² = F_*^*`
    pub b3: f64,
    /// `P F = F_*^* P` on the defect space of `P`
    #[serde(rename = "PF")]
    pub pf: f64,
    pub max: f64,
    pub pass: bool,
    pub tol: f64,
}

pub fn identity_suite(pair: &OperatorPair, fp: &FundamentalPair, tol: f64) -> IdentityReport {
    let s = &pair.s;
    let p = &pair.p;
    let sa = s.adjoint();
    let pa = p.adjoint();
    let dp = &fp.defect_p.defect_op;
    let ds = &fp.defect_pstar.defect_op;
    let f = fp.f_ambient();
    let fa = f.adjoint();
    let g = fp.fstar_ambient();
    let ga = g.adjoint();
    let norm = |m: ComplexMatrix| numlin::op_norm(&m);

    let a1 = norm(dp * s - (&f * dp + &fa * dp * p));
    let a2 = norm((dp * ds * &g - &pa * &ga) - (-(&f * &pa) + &fa * dp * ds));
    let a3 = norm(s * ds - (ds * &ga + p * ds * &g));
    let a4 = norm(&fa * &pa - &pa * &g);
    let b1 = norm(ds * &g - (&sa * ds - dp * &f * &pa));
    let b2 = norm(p * &f * dp - &ga * ds * p);
    let b3 = norm(p * &f * &pa + &ga * ds * ds - &ga);
    let pf = norm(p * &f - &ga * p);
    let max = [a1, a2, a3, a4, b1, b2, b3, pf].into_iter().fold(0.0, f64::max);
    IdentityReport {
        a1,
        a2,
        a3,
        a4,
        b1,
        b2,
        b3,
        pf,
        max,
        pass: max <= tol,
        tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    /// Distance between the sorted singular values of `F` and `F_1`
    /// (infinite when the defect ranks differ).
    pub singular_value_distance: f64,
    /// `‖F_1 - W F W*‖` for the defect-basis change `W = Q_1* U* Q`.
    pub intertwiner_residual: f64,
    /// The same two quantities for `F_*`.
    pub singular_value_distance_star: f64,
    pub intertwiner_residual_star: f64,
    pub pass: bool,
}

fn transport_one(
    f: &ComplexMatrix,
    d: &DefectData,
    f1: &ComplexMatrix,
    d1: &DefectData,
    u: &ComplexMatrix,
) -> (f64, f64) {
    if d.rank != d1.rank {
        return (f64::INFINITY, f64::INFINITY);
    }
    let sv = numlin::singular_values(f);
    let sv1 = numlin::singular_values(f1);
    let dist = sv
        .iter()
        .zip(&sv1)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let w = d1.basis.adjoint() * u.adjoint() * &d.basis;
    let res = numlin::op_norm(&(f1 - &w * f * w.adjoint()));
    (dist, res)
}

/// Checks that the fundamental operators of `(S, P)` and
/// `(U* S U, U* P U)` are unitarily equivalent through the induced change
/// of defect basis.
pub fn transport_under_unitary(
    pair: &OperatorPair,
    u: &ComplexMatrix,
    tol: f64,
) -> Result<TransportReport> {
    numlin::require_square(u, "U")?;
    if u.nrows() != pair.dim() {
        return Err(Error::ShapeMismatch("U must act on the pair's space".into()));
    }
    let residual = numlin::unitarity_residual(u);
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    let rank_tol = numlin::default_rank_tol(pair.dim());
    let fp = solve_fundamental(pair, rank_tol, tol)?;
    let fp1 = solve_fundamental(&pair.conjugate_by(u), rank_tol, tol)?;
    let (d, r) = transport_one(&fp.f, &fp.defect_p, &fp1.f, &fp1.defect_p, u);
    let (ds, rs) = transport_one(&fp.fstar, &fp.defect_pstar, &fp1.fstar, &fp1.defect_pstar, u);
    Ok(TransportReport {
        singular_value_distance: d,
        intertwiner_residual: r,
        singular_value_distance_star: ds,
        intertwiner_residual_star: rs,
        pass: d.max(r).max(ds).max(rs) <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{c, cr, scalar};
    use crate::sample;

    fn solve(s: f64, p: f64) -> FundamentalPair {
        let pair = OperatorPair::new(scalar(cr(s)), scalar(cr(p))).unwrap();
        solve_fundamental(&pair, 1e-9, 1e-10).unwrap()
    }

    #[test]
    fn gamma_unitary_has_empty_fundamental_operators() {
        let fp = solve(2.0, 1.0);
        assert_eq!(fp.f.shape(), (0, 0));
        assert_eq!(fp.fstar.shape(), (0, 0));
        assert_eq!(fp.residual_f, 0.0);
        assert_eq!(fp.residual_fstar, 0.0);
        assert!(fp.solved);
    }

    #[test]
    fn scalar_examples() {
        let fp = solve(1.0, 0.0);
        assert!((fp.f[(0, 0)] - cr(1.0)).norm() < 1e-15);
        assert!((fp.fstar[(0, 0)] - cr(1.0)).norm() < 1e-15);
        assert!((fp.omega_f - 1.0).abs() < 1e-15);
        let fp = solve(0.0, 0.4);
        assert!(fp.f[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn scalar_formula() {
        // For scalars F = (s - s̄p)/(1 - |p|²).
        let s = c(0.7, -0.3);
        let p = c(0.2, 0.4);
        let pair = OperatorPair::new(scalar(s), scalar(p)).unwrap();
        let fp = solve_fundamental(&pair, 1e-9, 1e-10).unwrap();
        let expected = (s - s.conj() * p) / (1.0 - p.norm_sqr());
        assert!((fp.f[(0, 0)] - expected).norm() < 1e-14);
    }

    #[test]
    fn identity_suite_scalar_and_unitary() {
        let pair = OperatorPair::new(scalar(cr(1.0)), scalar(cr(0.0))).unwrap();
        let fp = solve_fundamental(&pair, 1e-9, 1e-10).unwrap();
        let r = identity_suite(&pair, &fp, 1e-12);
        assert!(r.a1 < 1e-15 && r.pass, "{r:?}");

        let mut rng = sample::rng(5);
        let gu = sample::gamma_unitary_pair(&mut rng, 3);
        let fp = solve_fundamental(&gu, 1e-9 * 3.0, 1e-10).unwrap();
        let r = identity_suite(&gu, &fp, 1e-12);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn identity_suite_random_pairs() {
        let mut rng = sample::rng(17);
        for n in 1..=8 {
            let pair = sample::symmetrized_pair(&mut rng, n);
            let fp = solve_fundamental(&pair, numlin::default_rank_tol(n), 1e-10).unwrap();
            assert!(fp.solved, "{:?}", fp.report());
            assert!(fp.omega_f <= 1.0 + 1e-8 && fp.omega_fstar <= 1.0 + 1e-8);
            let r = identity_suite(&pair, &fp, 1e-9);
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn non_gamma_pair_is_flagged() {
        // S = 3, P = 0 still solves (D_P = 1) but ω(F) = 3.
        let fp = solve(3.0, 0.0);
        assert!(fp.omega_f > 1.0);
        // A pair with S - S*P leaking outside ran D_P is not solvable.
        let pair = OperatorPair::new(
            numlin::diag(&[c(0.0, 0.5), cr(0.0)]),
            numlin::diag(&[cr(1.0), cr(0.0)]),
        )
        .unwrap();
        let fp = solve_fundamental(&pair, 1e-9, 1e-10).unwrap();
        assert!(!fp.solved);
    }

    #[test]
    fn transport_examples() {
        let mut rng = sample::rng(23);
        let pair = sample::symmetrized_pair(&mut rng, 4);
        let r = transport_under_unitary(&pair, &numlin::identity(4), 1e-9).unwrap();
        assert!(r.pass && r.singular_value_distance < 1e-12);

        let u = sample::random_unitary(&mut rng, 4);
        let r = transport_under_unitary(&pair, &u, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");

        let scalar_pair = OperatorPair::new(scalar(cr(1.0)), scalar(cr(0.0))).unwrap();
        let u = sample::random_unitary(&mut rng, 1);
        let r = transport_under_unitary(&scalar_pair, &u, 1e-9).unwrap();
        assert!(r.pass);

        let not_unitary = numlin::identity(4).scale(0.5);
        assert!(matches!(
            transport_under_unitary(&pair, &not_unitary, 1e-9),
            Err(Error::NotUnitary { .. })
        ));
    }
}
