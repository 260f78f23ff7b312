//! Functional models.
//!
//! Pure Γ-isometries as Toeplitz pairs `(T_{A*+Az}, T_z)` on `H²(E)`, the
//! round trip back to `A`, Wold decompositions, the Douglas–Muhly–Pearcy
//! completion test and the co-isometric model of a Γ-contraction on
//! `H ⊕ D_{P*} ⊕ D_{P*} ⊕ ⋯`.

use serde::{Deserialize, Serialize};

use crate::dilation::{symbol_sup_norm, SYMBOL_GRID};
use crate::error::{Error, Result};
use crate::fundop::{fundamental_residual, solve_in_defect_coords, FundamentalPair};
use crate::gamma::OperatorPair;
use crate::numlin::{self, matrix_json, ComplexMatrix, DefectData};
use crate::seqop::{
    apply_power, compose_window, structural_distance, FiniteVector, SeqOperator, SlotLayout,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzChecks {
    /// `d(T_φ T_z, T_z T_φ)`
    pub commutation: f64,
    /// `d(T_φ, T_φ* T_z)`
    pub tphi_eq_tphistar_tz: f64,
    /// `d(T_z* T_z, I)`
    pub tz_isometry: f64,
    /// `max_{|z|=1} ‖A* + A z‖`
    pub symbol_norm: f64,
    pub pass: bool,
    pub tol: f64,
}

/// `(T_{A*+Az}, T_z)` on `H²(E) = E ⊕ E ⊕ ⋯`.
#[derive(Debug, Clone)]
pub struct ToeplitzPairModel {
    pub e_dim: usize,
    pub a: ComplexMatrix,
    pub tphi: SeqOperator,
    pub tz: SeqOperator,
    pub checks: ToeplitzChecks,
}

fn dist(a: &SeqOperator, b: &SeqOperator) -> f64 {
    structural_distance(a, b).unwrap_or(f64::INFINITY)
}

fn product(a: &SeqOperator, b: &SeqOperator) -> SeqOperator {
    compose_window(a, b, 0).expect("operators of one model share a layout")
}

pub fn pure_gamma_isometry_from_a(a: &ComplexMatrix, tol: f64) -> Result<ToeplitzPairModel> {
    let e = numlin::require_square(a, "A")?;
    if !numlin::is_finite(a) {
        return Err(Error::InvalidInput("A has non-finite entries".into()));
    }
    let omega = numlin::numerical_radius(a, numlin::NUMERICAL_RADIUS_ANGLE_TOL)?;
    if omega > 1.0 + tol {
        return Err(Error::NumericalRadiusExceeded { omega });
    }
    let layout = SlotLayout::one_sided(e, e);
    let ah = a.adjoint();
    let tphi = SeqOperator::builder(layout, layout, 1)
        .block(0, 0, ah.clone())
        .block(1, 0, a.clone())
        .block(1, 1, ah.clone())
        .right_tail(0, ah.clone())
        .right_tail(-1, a.clone())
        .build()?;
    let tz = SeqOperator::builder(layout, layout, 1)
        .block(1, 0, numlin::identity(e))
        .right_tail(-1, numlin::identity(e))
        .build()?;
    let commutation = dist(&product(&tphi, &tz), &product(&tz, &tphi));
    let tphi_eq_tphistar_tz = dist(&tphi, &product(&tphi.adjoint(), &tz));
    let tz_isometry = dist(&product(&tz.adjoint(), &tz), &SeqOperator::identity(layout));
    let symbol_norm = symbol_sup_norm(&ah, a, SYMBOL_GRID);
    let checks = ToeplitzChecks {
        pass: commutation.max(tphi_eq_tphistar_tz).max(tz_isometry) <= tol
            && symbol_norm <= 2.0 + tol,
        commutation,
        tphi_eq_tphistar_tz,
        tz_isometry,
        symbol_norm,
        tol,
    };
    Ok(ToeplitzPairModel {
        e_dim: e,
        a: a.clone(),
        tphi,
        tz,
        checks,
    })
}

/// Fundamental operator of a banded pair `(T, V)` whose defect
/// `I - V*V` and `T - T*V` are supported on finitely many slots.
#[derive(Debug, Clone)]
pub struct StructuralFundamental {
    /// Slots `lo..=hi` carrying the defect space.
    pub support: (i64, i64),
    /// Defect data of `I - V*V` on the support, in stacked slot coordinates.
    pub defect: DefectData,
    /// `B` in the coordinates of `defect.basis`.
    pub b: ComplexMatrix,
    /// `‖T - T*V - D_V B D_V‖` on the support.
    pub residual: f64,
    /// Largest block of `I - V*V` or `T - T*V` outside the support.
    pub support_residual: f64,
}

impl StructuralFundamental {
    /// `B` lifted to the stacked coordinates of the support.
    pub fn ambient(&self) -> ComplexMatrix {
        self.defect.lift(&self.b)
    }

    /// `(D_V x)` in defect coordinates, reading `x` on the support.
    pub fn coords(&self, x: &FiniteVector) -> numlin::ComplexVector {
        self.defect.to_coords() * x.window_coords(self.support.0, self.support.1)
    }
}

pub fn structural_fundamental(
    t: &SeqOperator,
    v: &SeqOperator,
    support: (i64, i64),
    rank_tol: f64,
) -> Result<StructuralFundamental> {
    let layout = v.layout_in();
    let gram = SeqOperator::identity(layout).sub(&compose_window(&v.adjoint(), v, 0)?)?;
    let x = t.sub(&compose_window(&t.adjoint(), v, 0)?)?;
    let (lo, hi) = support;
    let support_residual = gram.off_block_norm(lo, hi).max(x.off_block_norm(lo, hi));
    let gram_block = numlin::hermitian_part(&gram.to_dense(support, support));
    let x_block = x.to_dense(support, support);
    let defect = numlin::defect_from_gram(v.to_dense(support, support), &gram_block, rank_tol);
    let b = solve_in_defect_coords(&x_block, &defect);
    let residual = fundamental_residual(&x_block, &b, &defect);
    Ok(StructuralFundamental {
        support,
        defect,
        b,
        residual,
        support_residual,
    })
}

/// Fundamental operator of `(T_φ*, T_z*)`, read on its defect slot.
/// Equals `A` for a valid model.
pub fn recover_fundamental_from_model(model: &ToeplitzPairModel, _tol: f64) -> ComplexMatrix {
    let rank_tol = numlin::default_rank_tol(model.e_dim);
    structural_fundamental(&model.tphi.adjoint(), &model.tz.adjoint(), (0, 0), rank_tol)
        .map(|sf| sf.ambient())
        .unwrap_or_else(|_| numlin::zeros(model.e_dim, model.e_dim))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntertwiningReport {
    /// Number of coefficients of `W h` compared.
    pub depth: usize,
    /// Number of probe vectors `h`.
    pub probes: usize,
    /// `max ‖(W T h)_n - B (W h)_n - B* (W h)_{n+1}‖`
    pub t_residual: f64,
    /// `max ‖(W V h)_n - (W h)_{n+1}‖`
    pub v_residual: f64,
    /// `max |Σ_{n ≤ depth+1} ‖(W h)_n‖² + ‖V^{depth+2} h‖² - ‖h‖²|`
    pub isometry_residual: f64,
}

/// For a Γ-co-isometry `(T, V)` with fundamental operator `B`, the map
/// `W h = (D_V V^n h)_n` satisfies `W T = M*_{B*+Bz} W` and
/// `W V = M_z* W`. Compares the first `depth` coefficients on unit probes
/// in the slots `0..=probe_slots`.
pub fn graded_defect_intertwining(
    t: &SeqOperator,
    v: &SeqOperator,
    sf: &StructuralFundamental,
    probe_slots: i64,
    depth: usize,
) -> Result<IntertwiningReport> {
    let layout = v.layout_in();
    let b = &sf.b;
    let bh = b.adjoint();
    let mut t_residual: f64 = 0.0;
    let mut v_residual: f64 = 0.0;
    let mut isometry_residual: f64 = 0.0;
    let mut probes = 0;
    let lo = if layout.is_two_sided() { -probe_slots } else { 0 };
    for slot in lo..=probe_slots {
        for k in 0..layout.slot_dim(slot) {
            probes += 1;
            let h = FiniteVector::unit(layout, slot, k)?;
            let graded = |start: &FiniteVector, count: usize| -> Result<(Vec<_>, FiniteVector)> {
                let mut out = Vec::with_capacity(count);
                let mut x = start.clone();
                for _ in 0..count {
                    out.push(sf.coords(&x));
                    x = v.apply(&x)?;
                }
                Ok((out, x))
            };
            let (wh, rest) = graded(&h, depth + 2)?;
            let (wth, _) = graded(&t.apply(&h)?, depth + 1)?;
            let (wvh, _) = graded(&v.apply(&h)?, depth + 1)?;
            for n in 0..=depth {
                let expected = b * &wh[n] + &bh * &wh[n + 1];
                t_residual = t_residual.max((&wth[n] - expected).norm());
                v_residual = v_residual.max((&wvh[n] - &wh[n + 1]).norm());
            }
            let captured: f64 = wh.iter().map(|c| c.norm_squared()).sum();
            isometry_residual = isometry_residual.max((captured + rest.norm().powi(2) - 1.0).abs());
        }
    }
    Ok(IntertwiningReport {
        depth,
        probes,
        t_residual,
        v_residual,
        isometry_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationReport {
    /// Fundamental operator of `(T*, V*)` in defect coordinates.
    #[serde(with = "matrix_json")]
    pub g: ComplexMatrix,
    pub fundamental_residual: f64,
    pub support_residual: f64,
    pub intertwining: IntertwiningReport,
}

/// Identifies a pure Γ-isometry `(T, V)` whose co-defect `I - VV*` lives
/// on the slots `support` with `(T_{G*+Gz}, T_z)` on `H²(D_{V*})`, where
/// `G` is the fundamental operator of `(T*, V*)`. The identification is
/// `h ↦ (D_{V*} V*^n h)_n`; the report carries its intertwining residuals.
pub fn identify_pure_isometry(
    t: &SeqOperator,
    v: &SeqOperator,
    support: (i64, i64),
    probe_slots: i64,
    depth: usize,
) -> Result<IdentificationReport> {
    let rank_tol = numlin::default_rank_tol(v.layout_in().center_dim.max(1));
    let (ts, vs) = (t.adjoint(), v.adjoint());
    let sf = structural_fundamental(&ts, &vs, support, rank_tol)?;
    let intertwining = graded_defect_intertwining(&ts, &vs, &sf, probe_slots, depth)?;
    Ok(IdentificationReport {
        g: sf.b.clone(),
        fundamental_residual: sf.residual,
        support_residual: sf.support_residual,
        intertwining,
    })
}

#[derive(Debug, Clone)]
pub struct WoldDecomposition {
    /// Orthonormal basis of `⋂_k ran V^k`.
    pub unitary_basis: ComplexMatrix,
    /// Orthonormal basis of its orthogonal complement.
    pub pure_basis: ComplexMatrix,
}

fn intersect(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    if a.ncols() == 0 {
        return a.clone();
    }
    let outside = a - b * (b.adjoint() * a);
    a * numlin::null_space(&outside, tol)
}

/// Wold decomposition of an isometric matrix.
pub fn wold_decompose(v: &ComplexMatrix, tol: f64) -> Result<WoldDecomposition> {
    let n = numlin::require_square(v, "isometry")?;
    let residual = numlin::op_norm(&(v.adjoint() * v - numlin::identity(n)));
    if residual > tol {
        return Err(Error::NotIsometry { residual });
    }
    let mut current = numlin::identity(n);
    let mut power = numlin::identity(n);
    for _ in 0..n {
        power = &power * v;
        let next = intersect(&current, &numlin::orthonormal_range(&power, tol), tol);
        let stable = next.ncols() == current.ncols();
        current = next;
        if stable {
            break;
        }
    }
    Ok(WoldDecomposition {
        pure_basis: numlin::orthogonal_complement(&current),
        unitary_basis: current,
    })
}

/// Windowed Wold split of a banded isometry. Only an approximation of the
/// infinite-dimensional reducing subspaces: it intersects `ran V^k W` for
/// `0 ≤ k ≤ depth`, where `W` is spanned by the slots `0..width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WoldWindowReport {
    pub width: usize,
    pub depth: usize,
    pub window_dim: usize,
    pub unitary_dim: usize,
    pub pure_dim: usize,
    pub isometry_residual: f64,
}

pub fn wold_window(v: &SeqOperator, width: usize, depth: usize, tol: f64) -> Result<WoldWindowReport> {
    let layout = v.layout_in();
    if layout.is_two_sided() {
        return Err(Error::LayoutMismatch("windowed Wold split needs a one-sided layout".into()));
    }
    let isometry_residual = dist(&product(&v.adjoint(), v), &SeqOperator::identity(layout));
    if isometry_residual > tol {
        return Err(Error::NotIsometry {
            residual: isometry_residual,
        });
    }
    let w = width.max(1) as i64;
    let hi = w - 1 + depth as i64 * v.band().max(1);
    let mut basis = Vec::new();
    for slot in 0..w {
        for k in 0..layout.slot_dim(slot) {
            basis.push(FiniteVector::unit(layout, slot, k)?);
        }
    }
    let window_dim = basis.len();
    let mut current: Option<ComplexMatrix> = None;
    for k in 0..=depth {
        let cols: Vec<_> = basis
            .iter()
            .map(|e| apply_power(v, e, k).map(|x| x.window_coords(0, hi)))
            .collect::<Result<_>>()?;
        let range = numlin::orthonormal_range(&ComplexMatrix::from_columns(&cols), tol);
        current = Some(match current {
            None => range,
            Some(c) => intersect(&c, &range, tol),
        });
    }
    let unitary_dim = current.map_or(0, |c| c.ncols());
    Ok(WoldWindowReport {
        width: width.max(1),
        depth,
        window_dim,
        unitary_dim,
        pure_dim: window_dim - unitary_dim,
        isometry_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmpReport {
    pub is_contraction: bool,
    /// `σ_max([[T1, X], [0, T2]])`
    pub sigma_max: f64,
    #[serde(with = "option_matrix", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<ComplexMatrix>,
    pub c_norm: Option<f64>,
    /// `‖D_{T1*} C D_{T2} - X‖`
    pub factorization_residual: Option<f64>,
}

mod option_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<ComplexMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(numlin::MatrixJson::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<ComplexMatrix>, D::Error> {
        Option::<numlin::MatrixJson>::deserialize(d)?
            .map(ComplexMatrix::try_from)
            .transpose()
            .map_err(serde::de::Error::custom)
    }
}

fn defect_pinv(d: &DefectData) -> ComplexMatrix {
    let inv: Vec<f64> = d.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
    &d.basis * numlin::diag_real(&inv) * d.basis.adjoint()
}

/// `C = D_{T1*}⁺ X D_{T2}⁺` together with the factorization residual.
pub fn dmp_extract(
    t1: &ComplexMatrix,
    t2: &ComplexMatrix,
    x: &ComplexMatrix,
    tol: f64,
) -> Result<(ComplexMatrix, f64)> {
    let n1 = numlin::require_square(t1, "T1")?;
    let n2 = numlin::require_square(t2, "T2")?;
    if x.shape() != (n1, n2) {
        return Err(Error::ShapeMismatch(format!(
            "X is {}x{}, expected {n1}x{n2}",
            x.nrows(),
            x.ncols()
        )));
    }
    let d1 = numlin::defect(&t1.adjoint(), numlin::default_rank_tol(n1).max(tol))?;
    let d2 = numlin::defect(t2, numlin::default_rank_tol(n2).max(tol))?;
    let c = defect_pinv(&d1) * x * defect_pinv(&d2);
    let residual = numlin::op_norm(&(&d1.defect_op * &c * &d2.defect_op - x));
    Ok((c, residual))
}

pub fn dmp_check(t1: &ComplexMatrix, t2: &ComplexMatrix, x: &ComplexMatrix, tol: f64) -> Result<DmpReport> {
    let n1 = numlin::require_square(t1, "T1")?;
    let n2 = numlin::require_square(t2, "T2")?;
    if x.shape() != (n1, n2) {
        return Err(Error::ShapeMismatch(format!(
            "X is {}x{}, expected {n1}x{n2}",
            x.nrows(),
            x.ncols()
        )));
    }
    for (m, name) in [(t1, "T1"), (t2, "T2")] {
        let norm = numlin::op_norm(m);
        if norm > 1.0 + tol {
            return Err(Error::NotContractions {
                left: if name == "T1" { norm } else { numlin::op_norm(t1) },
                right: if name == "T2" { norm } else { numlin::op_norm(t2) },
            });
        }
    }
    let mut block = numlin::zeros(n1 + n2, n1 + n2);
    block.view_mut((0, 0), (n1, n1)).copy_from(t1);
    block.view_mut((0, n1), (n1, n2)).copy_from(x);
    block.view_mut((n1, n1), (n2, n2)).copy_from(t2);
    let sigma_max = numlin::op_norm(&block);
    if sigma_max > 1.0 + tol {
        return Ok(DmpReport {
            is_contraction: false,
            sigma_max,
            c: None,
            c_norm: None,
            factorization_residual: None,
        });
    }
    let (c, residual) = dmp_extract(t1, t2, x, tol)?;
    if residual > tol * (1.0 + numlin::op_norm(x)) {
        return Err(Error::FactorizationResidualExceeded { residual });
    }
    Ok(DmpReport {
        is_contraction: true,
        sigma_max,
        c_norm: Some(numlin::op_norm(&c)),
        c: Some(c),
        factorization_residual: Some(residual),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoisometryChecks {
    /// `d(V V*, I)`
    pub v_coisometry: f64,
    /// `d(T V, V T)`
    pub commutation: f64,
    /// `d(T*, T V*)`
    pub tstar_eq_t_vstar: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    /// Largest deviation of `T|_H` from `S`, of `V|_H` from `P`, and of the
    /// blocks mapping `H` out of itself.
    pub restriction_residual: f64,
    pub gamma_coisometry_checks: CoisometryChecks,
    /// `[rank D_P, rank D_V]`
    pub defect_dims: [usize; 2],
    #[serde(rename = "B_vs_Fstar_window_residual")]
    pub b_vs_fstar_window_residual: f64,
    pub intertwining: IntertwiningReport,
    /// `max(‖B Ω - Ω F‖, ‖Ω*Ω - I‖, ‖ΩΩ* - I‖)` for the map
    /// `Ω: D_P h ↦ D_V (h ⊕ 0)` between the defect spaces.
    pub b_vs_f_unitary_residual: f64,
    /// `‖T - T*V - D_V B D_V‖`
    pub b_fundamental_residual: f64,
    pub defect_support_residual: f64,
    pub wold_window: WoldWindowReport,
    pub pass: bool,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct CoisometricModel {
    pub t: SeqOperator,
    pub v: SeqOperator,
    pub fundamental: StructuralFundamental,
    pub report: ModelReport,
}

pub const MODEL_WINDOW_WIDTH: usize = 4;
pub const MODEL_INTERTWINING_DEPTH: usize = 8;

/// Γ-co-isometric extension `(T, V)` of `(S, P)` on
/// `H ⊕ D_{P*} ⊕ D_{P*} ⊕ ⋯` and its checks.
pub fn build_coisometric_model(
    pair: &OperatorPair,
    fp: &FundamentalPair,
    tol: f64,
) -> Result<CoisometricModel> {
    if !fp.solved {
        return Err(Error::FactorizationResidualExceeded {
            residual: fp.residual_f.max(fp.residual_fstar),
        });
    }
    let n = pair.dim();
    let rs = fp.defect_pstar.rank;
    let qs = &fp.defect_pstar.basis;
    let ds_qs = &fp.defect_pstar.defect_op * qs;
    let fs = &fp.fstar;
    let layout = SlotLayout::one_sided(n, rs);
    let t = SeqOperator::builder(layout, layout, 1)
        .block(0, 0, pair.s.clone())
        .block(0, 1, &ds_qs * fs)
        .block(1, 1, fs.adjoint())
        .block(1, 2, fs.clone())
        .right_tail(0, fs.adjoint())
        .right_tail(1, fs.clone())
        .build()?;
    let v = SeqOperator::builder(layout, layout, 1)
        .block(0, 0, pair.p.clone())
        .block(0, 1, ds_qs)
        .block(1, 2, numlin::identity(rs))
        .right_tail(1, numlin::identity(rs))
        .build()?;

    let mut restriction_residual = numlin::op_norm(&(t.block(0, 0) - &pair.s))
        .max(numlin::op_norm(&(v.block(0, 0) - &pair.p)));
    for row in 1..=t.radius().max(v.radius()) + 1 {
        restriction_residual = restriction_residual
            .max(numlin::op_norm(&t.block(row, 0)))
            .max(numlin::op_norm(&v.block(row, 0)));
    }

    let vh = v.adjoint();
    let v_coisometry = dist(&product(&v, &vh), &SeqOperator::identity(layout));
    let commutation = dist(&product(&t, &v), &product(&v, &t));
    let tstar_eq_t_vstar = dist(&t.adjoint(), &product(&t, &vh));
    let gamma_coisometry_checks = CoisometryChecks {
        pass: v_coisometry.max(commutation).max(tstar_eq_t_vstar) <= tol,
        v_coisometry,
        commutation,
        tstar_eq_t_vstar,
    };

    let sf = structural_fundamental(&t, &v, (0, 1), fp.defect_p.rank_tol)?;
    let intertwining =
        graded_defect_intertwining(&t, &v, &sf, 2, MODEL_INTERTWINING_DEPTH)?;
    let wold = wold_window(&vh, MODEL_WINDOW_WIDTH, MODEL_WINDOW_WIDTH + n + 1, tol.max(1e-9))?;
    let defect_dims = [fp.defect_p.rank, sf.defect.rank];
    let b_vs_fstar_window_residual = intertwining.t_residual.max(intertwining.v_residual);
    let b_vs_f_unitary_residual = defect_identification_residual(fp, &sf);
    let scale = 1.0 + numlin::op_norm(&pair.s);
    let report = ModelReport {
        pass: restriction_residual <= tol
            && gamma_coisometry_checks.pass
            && defect_dims[0] == defect_dims[1]
            && b_vs_fstar_window_residual <= tol * scale
            && sf.residual <= tol * scale
            && sf.support_residual <= tol
            && b_vs_f_unitary_residual <= tol * scale,
        restriction_residual,
        gamma_coisometry_checks,
        defect_dims,
        b_vs_fstar_window_residual,
        intertwining,
        b_vs_f_unitary_residual,
        b_fundamental_residual: sf.residual,
        defect_support_residual: sf.support_residual,
        wold_window: wold,
        tol,
    };
    Ok(CoisometricModel {
        t,
        v,
        fundamental: sf,
        report,
    })
}

/// `Ω` in defect coordinates: `Q_V* D_V J Q_P Λ_P^{-1/2}`, where `J`
/// embeds `H` as the center slot.
fn defect_identification_residual(fp: &FundamentalPair, sf: &StructuralFundamental) -> f64 {
    let dp = &fp.defect_p;
    let n = dp.dim();
    let rows = sf.defect.dim();
    let r = dp.rank;
    if r != sf.defect.rank {
        return f64::INFINITY;
    }
    let mut embedded = numlin::zeros(rows, r);
    let inv: Vec<f64> = dp.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
    embedded
        .view_mut((0, 0), (n, r))
        .copy_from(&(&dp.basis * numlin::diag_real(&inv)));
    let omega = sf.defect.to_coords() * embedded;
    numlin::op_norm(&(&sf.b * &omega - &omega * &fp.f)).max(numlin::unitarity_residual(&omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fundop::solve_fundamental;
    use crate::numlin::{c, cr, default_rank_tol, from_real_rows, scalar};
    use crate::sample;

    #[test]
    fn zero_symbol() {
        let m = pure_gamma_isometry_from_a(&scalar(cr(0.0)), 1e-10).unwrap();
        assert!(m.checks.pass, "{:?}", m.checks);
        assert_eq!(m.checks.symbol_norm, 0.0);
        let rec = recover_fundamental_from_model(&m, 1e-10);
        assert!(rec.norm() < 1e-15);
    }

    #[test]
    fn unit_symbol() {
        let m = pure_gamma_isometry_from_a(&scalar(cr(1.0)), 1e-10).unwrap();
        assert!(m.checks.pass);
        assert!((m.checks.symbol_norm - 2.0).abs() < 1e-12);
        let rec = recover_fundamental_from_model(&m, 1e-10);
        assert!((rec[(0, 0)] - cr(1.0)).norm() < 1e-14);
    }

    #[test]
    fn nilpotent_symbol_attains_two() {
        let a = from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let m = pure_gamma_isometry_from_a(&a, 1e-10).unwrap();
        assert!(m.checks.pass, "{:?}", m.checks);
        assert!((m.checks.symbol_norm - 2.0).abs() < 1e-9);
        assert!((recover_fundamental_from_model(&m, 1e-10) - a).norm() < 1e-14);
    }

    #[test]
    fn numerical_radius_guard() {
        let a = scalar(cr(1.1));
        assert!(matches!(
            pure_gamma_isometry_from_a(&a, 1e-8),
            Err(Error::NumericalRadiusExceeded { .. })
        ));
    }

    #[test]
    fn random_round_trips() {
        let mut rng = sample::rng(31);
        for k in 0..40 {
            let n = 1 + k % 4;
            let a = sample::matrix_with_numerical_radius(&mut rng, n, 0.999);
            let m = pure_gamma_isometry_from_a(&a, 1e-10).unwrap();
            assert!(m.checks.pass);
            assert!((recover_fundamental_from_model(&m, 1e-10) - &a).norm() < 1e-12);
        }
    }

    #[test]
    fn toeplitz_model_identifies_with_itself() {
        let a = from_real_rows(&[&[0.2, 0.5], &[-0.1, 0.3]]);
        let m = pure_gamma_isometry_from_a(&a, 1e-10).unwrap();
        let rep = identify_pure_isometry(&m.tphi, &m.tz, (0, 0), 3, 6).unwrap();
        assert!(rep.intertwining.t_residual < 1e-14, "{rep:?}");
        assert!(rep.intertwining.v_residual < 1e-14);
        assert!(rep.intertwining.isometry_residual < 1e-14);
    }

    #[test]
    fn gamma_isometric_dilation_of_pure_p_is_identified() {
        // For P with spectral radius < 1 the dilation (T♭, V♭) is pure.
        let mut rng = sample::rng(8);
        let (t1, t2) = sample::commuting_contractions(&mut rng, 3);
        let pair = OperatorPair::from_parts(&t1 + &t2, &t1 * &t2);
        let fp = solve_fundamental(&pair, default_rank_tol(3), 1e-10).unwrap();
        let b = crate::dilation::build_sznagy(&pair, &fp).unwrap();
        let rep = identify_pure_isometry(&b.tflat, &b.vflat, (0, 1), 2, 40).unwrap();
        assert!(rep.support_residual < 1e-12);
        assert!(rep.intertwining.t_residual < 1e-10, "{rep:?}");
        assert!(rep.intertwining.v_residual < 1e-12);
    }

    #[test]
    fn dense_wold() {
        let mut rng = sample::rng(2);
        let u = sample::random_unitary(&mut rng, 4);
        let w = wold_decompose(&u, 1e-10).unwrap();
        assert_eq!((w.unitary_basis.ncols(), w.pure_basis.ncols()), (4, 0));
        let not_iso = numlin::diag_real(&[1.0, 0.5]);
        assert!(matches!(wold_decompose(&not_iso, 1e-10), Err(Error::NotIsometry { .. })));
    }

    #[test]
    fn windowed_wold_splits_unitary_and_shift() {
        let mut rng = sample::rng(3);
        let u = sample::random_unitary(&mut rng, 2);
        // U ⊕ S on C² ⊕ (C ⊕ C ⊕ ⋯), the shift acting on slots ≥ 1.
        let layout = SlotLayout::one_sided(2, 1);
        let v = SeqOperator::builder(layout, layout, 1)
            .block(0, 0, u)
            .right_tail(-1, numlin::identity(1))
            .build()
            .unwrap();
        let r = wold_window(&v, 4, 6, 1e-10).unwrap();
        assert_eq!(r.unitary_dim, 2, "{r:?}");
        assert_eq!(r.pure_dim, 3);

        let shift_layout = SlotLayout::one_sided(1, 1);
        let shift = SeqOperator::builder(shift_layout, shift_layout, 1)
            .block(1, 0, numlin::identity(1))
            .right_tail(-1, numlin::identity(1))
            .build()
            .unwrap();
        let r = wold_window(&shift, 4, 6, 1e-10).unwrap();
        assert_eq!(r.unitary_dim, 0);
    }

    #[test]
    fn dmp_examples() {
        let z = scalar(cr(0.0));
        let r = dmp_check(&z, &z, &scalar(c(0.3, 0.4)), 1e-10).unwrap();
        assert!(r.is_contraction);
        assert!((r.c.unwrap()[(0, 0)] - c(0.3, 0.4)).norm() < 1e-15);

        let id = numlin::identity(2);
        let r = dmp_check(&id, &id, &numlin::zeros(2, 2), 1e-10).unwrap();
        assert!(r.is_contraction);
        assert_eq!(r.c.unwrap().norm(), 0.0);

        let h = scalar(cr(0.5));
        let r = dmp_check(&h, &h, &scalar(cr(0.75)), 1e-10).unwrap();
        assert!(r.is_contraction);
        assert!((r.sigma_max - 1.0).abs() < 1e-12);
        assert!((r.c.unwrap()[(0, 0)] - cr(1.0)).norm() < 1e-12);

        let r = dmp_check(&h, &h, &scalar(cr(0.8)), 1e-10).unwrap();
        assert!(!r.is_contraction && r.c.is_none());
        assert!(dmp_check(&h, &id, &scalar(cr(0.1)), 1e-10).is_err());
    }

    #[test]
    fn dmp_forward_assembly() {
        let mut rng = sample::rng(4);
        for _ in 0..50 {
            let t1 = sample::random_contraction(&mut rng, 3, 3);
            let t2 = sample::random_contraction(&mut rng, 2, 2);
            let cm = sample::random_contraction(&mut rng, 3, 2);
            let d1 = numlin::defect(&t1.adjoint(), 1e-12).unwrap().defect_op;
            let d2 = numlin::defect(&t2, 1e-12).unwrap().defect_op;
            let x = &d1 * &cm * &d2;
            let r = dmp_check(&t1, &t2, &x, 1e-9).unwrap();
            assert!(r.is_contraction && r.sigma_max <= 1.0 + 1e-10);
            assert!(r.c_norm.unwrap() <= 1.0 + 1e-8);
            assert!(r.factorization_residual.unwrap() <= 1e-9);
        }
    }

    #[test]
    fn coisometric_model_examples() {
        let pair = OperatorPair::new(scalar(cr(2.0)), scalar(cr(1.0))).unwrap();
        let fp = solve_fundamental(&pair, default_rank_tol(1), 1e-10).unwrap();
        let m = build_coisometric_model(&pair, &fp, 1e-9).unwrap();
        assert!(m.report.pass, "{:?}", m.report);
        assert_eq!(m.report.defect_dims, [0, 0]);
        assert_eq!(m.fundamental.b.len(), 0);

        let pair = OperatorPair::new(scalar(cr(1.0)), scalar(cr(0.0))).unwrap();
        let fp = solve_fundamental(&pair, default_rank_tol(1), 1e-10).unwrap();
        let m = build_coisometric_model(&pair, &fp, 1e-9).unwrap();
        assert!(m.report.pass, "{:?}", m.report);
        assert_eq!(m.report.defect_dims, [1, 1]);
        // V's first column is (0; 0; ...) and its first row is (0, 1, 0, ...)
        assert!(m.v.block(0, 1)[(0, 0)].norm() > 0.99);
        assert!(m.v.block(1, 0).norm() == 0.0);
    }

    #[test]
    fn coisometric_model_random_pairs() {
        for seed in 0..20 {
            let mut rng = sample::rng(100 + seed);
            let n = 1 + (seed as usize % 5);
            let pair = sample::symmetrized_pair(&mut rng, n);
            let fp = solve_fundamental(&pair, default_rank_tol(n), 1e-10).unwrap();
            let m = build_coisometric_model(&pair, &fp, 1e-9).unwrap();
            assert!(m.report.pass, "seed {seed}: {:?}", m.report);
            assert!(m.report.restriction_residual <= 1e-10);
            assert!(m.report.b_vs_f_unitary_residual <= 1e-10, "{}", m.report.b_vs_f_unitary_residual);
        }
    }
}
