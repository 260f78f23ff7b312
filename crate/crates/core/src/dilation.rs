//! Minimal Γ-unitary and Γ-isometric dilations of a Γ-contraction.
//!
//! `(T0, U0)` acts on `⋯ ⊕ D_P ⊕ D_P ⊕ H ⊕ D_{P*} ⊕ D_{P*} ⊕ ⋯` with `U0`
//! the Sz.-Nagy unitary dilation of `P`. `(T♭, V♭)` acts on
//! `H ⊕ D_P ⊕ D_P ⊕ ⋯`, where one-sided index `k ≥ 1` corresponds to
//! two-sided index `-k`. Defect slots are stored in the coordinates of the
//! defect bases carried by the [`FundamentalPair`].

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fundop::FundamentalPair;
use crate::gamma::OperatorPair;
use crate::numlin::{self, ComplexMatrix};
use crate::seqop::{compose_window, structural_distance, FiniteVector, SeqOperator, SlotLayout};

pub const DEFAULT_WINDOW_RADIUS: i64 = 3;

/// Unimodular grid used for symbol norm bounds.
pub const SYMBOL_GRID: usize = 720;

#[derive(Debug, Clone)]
pub struct DilationBundle {
    pub pair: OperatorPair,
    pub fp: FundamentalPair,
    pub t0: SeqOperator,
    pub u0: SeqOperator,
    pub tflat: SeqOperator,
    pub vflat: SeqOperator,
    /// Seam residuals of the assembled operators.
    pub diagnostics: BTreeMap<String, f64>,
}

impl DilationBundle {
    pub fn two_sided_layout(&self) -> SlotLayout {
        self.u0.layout_in()
    }

    pub fn one_sided_layout(&self) -> SlotLayout {
        self.vflat.layout_in()
    }
}

struct Pieces {
    n: usize,
    rp: usize,
    rs: usize,
    /// `Q_P* D_P`, r_P x n
    dp_coords: ComplexMatrix,
    /// `D_{P*} Q_{P*}`, n x r_*
    ds_from_coords: ComplexMatrix,
    /// `Q_P* P* Q_{P*}`, r_P x r_*
    pstar_coords: ComplexMatrix,
}

fn pieces(pair: &OperatorPair, fp: &FundamentalPair) -> Pieces {
    let qp = &fp.defect_p.basis;
    let qs = &fp.defect_pstar.basis;
    Pieces {
        n: pair.dim(),
        rp: fp.defect_p.rank,
        rs: fp.defect_pstar.rank,
        dp_coords: fp.defect_p.to_coords(),
        ds_from_coords: &fp.defect_pstar.defect_op * qs,
        pstar_coords: qp.adjoint() * pair.p.adjoint() * qs,
    }
}

fn require_solved(fp: &FundamentalPair) -> Result<()> {
    if fp.solved {
        Ok(())
    } else {
        Err(Error::FactorizationResidualExceeded {
            residual: fp.residual_f.max(fp.residual_fstar),
        })
    }
}

/// Sz.-Nagy unitary dilation `U0` of `P`.
pub fn build_u0(pair: &OperatorPair, fp: &FundamentalPair) -> Result<SeqOperator> {
    let k = pieces(pair, fp);
    let w = DEFAULT_WINDOW_RADIUS;
    let layout = SlotLayout::two_sided(k.rp, k.n, k.rs);
    SeqOperator::builder(layout, layout, w)
        .left_tail(1, numlin::identity(k.rp))
        .right_tail(1, numlin::identity(k.rs))
        .tail_rows_in_window((-w..=-2).chain(1..=w))
        .block(-1, 0, k.dp_coords.clone())
        .block(-1, 1, -&k.pstar_coords)
        .block(0, 0, pair.p.clone())
        .block(0, 1, k.ds_from_coords.clone())
        .build()
}

/// `T0`, the first component of the minimal Γ-unitary dilation.
pub fn build_t0(pair: &OperatorPair, fp: &FundamentalPair) -> Result<SeqOperator> {
    let k = pieces(pair, fp);
    let w = DEFAULT_WINDOW_RADIUS;
    let layout = SlotLayout::two_sided(k.rp, k.n, k.rs);
    let f = &fp.f;
    let fh = f.adjoint();
    let fs = &fp.fstar;
    let fsh = fs.adjoint();
    SeqOperator::builder(layout, layout, w)
        .left_tail(0, f.clone())
        .left_tail(1, fh.clone())
        .right_tail(0, fsh)
        .right_tail(1, fs.clone())
        .tail_rows_in_window((-w..=-2).chain(1..=w))
        .block(-1, -1, f.clone())
        .block(-1, 0, &fh * &k.dp_coords)
        .block(-1, 1, -(&fh * &k.pstar_coords))
        .block(0, 0, pair.s.clone())
        .block(0, 1, &k.ds_from_coords * fs)
        .build()
}

/// Minimal Γ-isometric dilation `(T♭, V♭)` on `H ⊕ D_P ⊕ D_P ⊕ ⋯`.
pub fn build_gamma_isometric(
    pair: &OperatorPair,
    fp: &FundamentalPair,
) -> Result<(SeqOperator, SeqOperator)> {
    require_solved(fp)?;
    let k = pieces(pair, fp);
    let w = DEFAULT_WINDOW_RADIUS;
    let layout = SlotLayout::one_sided(k.n, k.rp);
    let f = &fp.f;
    let fh = f.adjoint();
    let tflat = SeqOperator::builder(layout, layout, w)
        .right_tail(0, f.clone())
        .right_tail(-1, fh.clone())
        .tail_rows_in_window(2..=w)
        .block(0, 0, pair.s.clone())
        .block(1, 0, &fh * &k.dp_coords)
        .block(1, 1, f.clone())
        .build()?;
    let vflat = SeqOperator::builder(layout, layout, w)
        .right_tail(-1, numlin::identity(k.rp))
        .tail_rows_in_window(2..=w)
        .block(0, 0, pair.p.clone())
        .block(1, 0, k.dp_coords.clone())
        .build()?;
    Ok((tflat, vflat))
}

pub fn build_sznagy(pair: &OperatorPair, fp: &FundamentalPair) -> Result<DilationBundle> {
    require_solved(fp)?;
    let t0 = build_t0(pair, fp)?;
    let u0 = build_u0(pair, fp)?;
    let (tflat, vflat) = build_gamma_isometric(pair, fp)?;
    let diagnostics = [
        ("seam_T0", t0.seam_residual()),
        ("seam_U0", u0.seam_residual()),
        ("seam_Tflat", tflat.seam_residual()),
        ("seam_Vflat", vflat.seam_residual()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(DilationBundle {
        pair: pair.clone(),
        fp: fp.clone(),
        t0,
        u0,
        tflat,
        vflat,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    /// `max_{m,n} ‖P_H T0^m U0^n|_H - S^m P^n‖`
    pub residual: f64,
    pub worst_powers: [usize; 2],
    pub max_power: usize,
    pub pass: bool,
    pub tol: f64,
}

/// Compares the compressions of `T0^m U0^n` to `H` with `S^m P^n` for all
/// `0 ≤ m, n ≤ max_power`, by exact application to `δ_0 ⊗ e_i`.
pub fn verify_dilation(bundle: &DilationBundle, max_power: usize, tol: f64) -> PowerReport {
    let n = bundle.pair.dim();
    let layout = bundle.two_sided_layout();
    let s = &bundle.pair.s;
    let p = &bundle.pair.p;
    // compressed[m][k] is the n x n compression of T0^m U0^k.
    let mut compressed = vec![vec![numlin::zeros(n, n); max_power + 1]; max_power + 1];
    for i in 0..n {
        let mut u = FiniteVector::unit(layout, 0, i).expect("center slot");
        for k in 0..=max_power {
            let mut t = u.clone();
            for row in compressed.iter_mut() {
                row[k].set_column(i, &t.block(0));
                t = bundle.t0.apply(&t).expect("layouts match");
            }
            u = bundle.u0.apply(&u).expect("layouts match");
        }
    }
    let mut residual: f64 = 0.0;
    let mut worst = [0, 0];
    let mut sm = numlin::identity(n);
    for (m, row) in compressed.iter().enumerate() {
        let mut smpn = sm.clone();
        for (k, c) in row.iter().enumerate() {
            let r = numlin::op_norm(&(c - &smpn));
            if r > residual {
                residual = r;
                worst = [m, k];
            }
            smpn = &smpn * p;
        }
        sm = &sm * s;
    }
    PowerReport {
        residual,
        worst_powers: worst,
        max_power,
        pass: residual <= tol,
        tol,
    }
}

/// `max_{|z|=1} ‖A + B z‖` on a uniform grid.
pub fn symbol_sup_norm(a: &ComplexMatrix, b: &ComplexMatrix, grid: usize) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    (0..grid)
        .map(|k| {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / grid as f64);
            numlin::op_norm(&(a + b * z))
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBoundReport {
    /// `max_z ‖F + F* z‖`
    pub symbol_norm_f: f64,
    /// `max_z ‖F_*^* + F_* z‖`
    pub symbol_norm_fstar: f64,
    pub norm_s: f64,
    pub grid: usize,
    pub pass: bool,
}

pub fn spectral_bound(bundle: &DilationBundle, tol: f64) -> SpectralBoundReport {
    let f = &bundle.fp.f;
    let fs = &bundle.fp.fstar;
    let symbol_norm_f = symbol_sup_norm(f, &f.adjoint(), SYMBOL_GRID);
    let symbol_norm_fstar = symbol_sup_norm(&fs.adjoint(), fs, SYMBOL_GRID);
    let norm_s = numlin::op_norm(&bundle.pair.s);
    SpectralBoundReport {
        symbol_norm_f,
        symbol_norm_fstar,
        norm_s,
        grid: SYMBOL_GRID,
        pass: [symbol_norm_f, symbol_norm_fstar, norm_s]
            .iter()
            .all(|&x| x <= 2.0 + tol),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// `max(d(U0*U0, I), d(U0 U0*, I))`
    pub u0_unitary: f64,
    /// `d(T0 U0, U0 T0)`
    pub commutation: f64,
    /// `d(T0, T0* U0)`
    pub t0_eq_t0star_u0: f64,
    /// `d(V♭* V♭, I)`
    pub vflat_isometry: f64,
    /// `d(T♭ V♭, V♭ T♭)`
    pub flat_commutation: f64,
    /// `d(T♭, T♭* V♭)`
    pub tflat_eq_tflatstar_vflat: f64,
    /// Blockwise residual of `T♭*|_H = S*` and `V♭*|_H = P*`.
    pub coextension_residual: f64,
    /// Blockwise distance between `(T0, U0)` restricted to
    /// `⋯ ⊕ D_P ⊕ H` and `(T♭, V♭)`.
    pub containment_residual: f64,
    pub spectral_bound: SpectralBoundReport,
    pub pass: bool,
    pub tol: f64,
}

fn dist(a: &SeqOperator, b: &SeqOperator) -> f64 {
    structural_distance(a, b).unwrap_or(f64::INFINITY)
}

fn product(a: &SeqOperator, b: &SeqOperator) -> SeqOperator {
    compose_window(a, b, 0).expect("operators of one bundle share a layout")
}

/// Structural Γ-unitary checks for `(T0, U0)` and Γ-isometry checks for
/// `(T♭, V♭)`, each certified on windows and tails.
pub fn verify_gamma_unitary_structure(bundle: &DilationBundle, tol: f64) -> StructureReport {
    let (t0, u0) = (&bundle.t0, &bundle.u0);
    let id2 = SeqOperator::identity(bundle.two_sided_layout());
    let u0h = u0.adjoint();
    let u0_unitary = dist(&product(&u0h, u0), &id2).max(dist(&product(u0, &u0h), &id2));
    let commutation = dist(&product(t0, u0), &product(u0, t0));
    let t0_eq_t0star_u0 = dist(t0, &product(&t0.adjoint(), u0));

    let (tf, vf) = (&bundle.tflat, &bundle.vflat);
    let id1 = SeqOperator::identity(bundle.one_sided_layout());
    let vflat_isometry = dist(&product(&vf.adjoint(), vf), &id1);
    let flat_commutation = dist(&product(tf, vf), &product(vf, tf));
    let tflat_eq_tflatstar_vflat = dist(tf, &product(&tf.adjoint(), vf));

    let coextension_residual = coextension_residual(bundle);
    let containment_residual =
        containment_distance(u0, vf).max(containment_distance(t0, tf));
    let spectral_bound = spectral_bound(bundle, tol);
    let structural = [
        u0_unitary,
        commutation,
        t0_eq_t0star_u0,
        vflat_isometry,
        flat_commutation,
        tflat_eq_tflatstar_vflat,
        coextension_residual,
        containment_residual,
    ];
    StructureReport {
        u0_unitary,
        commutation,
        t0_eq_t0star_u0,
        vflat_isometry,
        flat_commutation,
        tflat_eq_tflatstar_vflat,
        coextension_residual,
        containment_residual,
        pass: structural.iter().all(|&x| x <= tol) && spectral_bound.pass,
        spectral_bound,
        tol,
    }
}

/// `T♭*` and `V♭*` map `δ_0 ⊗ h` to `δ_0 ⊗ S*h` and `δ_0 ⊗ P*h`: largest
/// deviation over a basis of `H`, including any mass leaking off the
/// center.
pub fn coextension_residual(bundle: &DilationBundle) -> f64 {
    let layout = bundle.one_sided_layout();
    let n = bundle.pair.dim();
    let mut worst: f64 = 0.0;
    for (op, target) in [(&bundle.tflat, &bundle.pair.s), (&bundle.vflat, &bundle.pair.p)] {
        let th = target.adjoint();
        for i in 0..n {
            let e = FiniteVector::unit(layout, 0, i).expect("center slot");
            let out = op.adjoint_apply(&e).expect("layouts match");
            let expected = FiniteVector::center(layout, th.column(i).into_owned())
                .expect("center slot");
            worst = worst.max(out.add_scaled(&expected, Complex64::new(-1.0, 0.0)).norm());
        }
    }
    worst
}

/// Distance between the two-sided operator compressed to the indices
/// `≤ 0` (read in reverse) and the one-sided operator, plus the norm of
/// everything mapping those indices to positive ones. Zero iff
/// `⋯ ⊕ D_P ⊕ H` is invariant and the restriction equals `one`.
pub fn containment_distance(two: &SeqOperator, one: &SeqOperator) -> f64 {
    let reach = two.radius().max(one.radius()) + two.band().max(one.band()) + 1;
    let mut worst: f64 = 0.0;
    for row in -reach..=reach + two.band() {
        for col in -reach - two.band()..=0 {
            let block = two.block(row, col);
            let gap = if row > 0 {
                numlin::op_norm(&block)
            } else {
                numlin::op_norm(&(block - one.block(-row, -col)))
            };
            worst = worst.max(gap);
        }
    }
    // Beyond `reach` both operators are Toeplitz; compare the patterns.
    let offsets: std::collections::BTreeSet<i64> = two
        .left_tail()
        .keys()
        .copied()
        .chain(one.right_tail().keys().map(|o| -o))
        .collect();
    for o in offsets {
        let a = two.block(-reach - 1, -reach - 1 + o);
        let b = one.block(reach + 1, reach + 1 - o);
        worst = worst.max(numlin::op_norm(&(a - b)));
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub horizon: usize,
    /// Numerical rank of the collected orbit vectors.
    pub rank: usize,
    /// Total dimension of the slots with index in `[-horizon, horizon]`.
    pub window_dim: usize,
    /// Largest distance of a coordinate vector of a slot with
    /// `|index| ≤ horizon - 1` from the span of the orbit.
    pub coverage_residual: f64,
    pub filled: bool,
    pub tol: f64,
}

/// Checks that `U0^k H` and `U0*^k H`, `0 ≤ k ≤ horizon`, span every slot
/// with `|index| ≤ horizon - 1`.
pub fn minimality_check(bundle: &DilationBundle, horizon: usize, tol: f64) -> MinimalityReport {
    let layout = bundle.two_sided_layout();
    let n = bundle.pair.dim();
    let h = horizon as i64;
    let window_dim = layout.window_dim(-h, h);
    let mut columns = Vec::new();
    for i in 0..n {
        let start = FiniteVector::unit(layout, 0, i).expect("center slot");
        let mut fwd = start.clone();
        let mut back = start;
        for _ in 0..=horizon {
            columns.push(fwd.window_coords(-h, h));
            columns.push(back.window_coords(-h, h));
            fwd = bundle.u0.apply(&fwd).expect("layouts match");
            back = bundle.u0.adjoint_apply(&back).expect("layouts match");
        }
    }
    let m = ComplexMatrix::from_columns(&columns);
    let svd = m.clone().svd(true, false);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol * smax.max(1.0);
    let u = svd.u.expect("requested U");
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > cutoff)
        .collect();
    let rank = kept.len();
    let q = ComplexMatrix::from_fn(window_dim, rank, |i, j| u[(i, kept[j])]);

    // Coordinate rows of the slots with |index| ≤ horizon - 1.
    let inner_lo = layout.window_dim(-h, -h);
    let inner_dim = if h == 0 { 0 } else { layout.window_dim(-(h - 1), h - 1) };
    let mut coverage_residual: f64 = 0.0;
    for r in inner_lo..inner_lo + inner_dim {
        // e_r - Q Q* e_r, with Q* e_r the conjugated row r of Q
        let mut gap = -(&q * q.row(r).adjoint());
        gap[r] += Complex64::new(1.0, 0.0);
        coverage_residual = coverage_residual.max(gap.norm());
    }
    MinimalityReport {
        horizon,
        rank,
        window_dim,
        coverage_residual,
        filled: coverage_residual <= tol,
        tol,
    }
}

/// Combined dilation report in the shape the command line emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub dilation_residual: f64,
    pub commutation: f64,
    #[serde(rename = "T0_eq_T0starU0")]
    pub t0_eq_t0star_u0: f64,
    #[serde(rename = "U0_unitary")]
    pub u0_unitary: f64,
    pub spectral_bound: SpectralBoundReport,
    pub minimality: MinimalitySummary,
    pub powers: PowerReport,
    pub structure: StructureReport,
    pub diagnostics: BTreeMap<String, f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalitySummary {
    pub horizon: usize,
    pub filled: bool,
    pub rank: usize,
    pub window_dim: usize,
    pub coverage_residual: f64,
}

impl DilationReport {
    pub fn assemble(
        bundle: &DilationBundle,
        powers: PowerReport,
        structure: StructureReport,
        minimality: MinimalityReport,
    ) -> Self {
        DilationReport {
            dilation_residual: powers.residual,
            commutation: structure.commutation,
            t0_eq_t0star_u0: structure.t0_eq_t0star_u0,
            u0_unitary: structure.u0_unitary,
            spectral_bound: structure.spectral_bound.clone(),
            pass: powers.pass && structure.pass && minimality.filled,
            minimality: MinimalitySummary {
                horizon: minimality.horizon,
                filled: minimality.filled,
                rank: minimality.rank,
                window_dim: minimality.window_dim,
                coverage_residual: minimality.coverage_residual,
            },
            powers,
            structure,
            diagnostics: bundle.diagnostics.clone(),
        }
    }
}
