//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are plain `nalgebra::DMatrix<Complex64>` values. Everything in
//! here is a pure function of its inputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Number of coarse angles used by [`numerical_radius`] before refinement.
pub const NUMERICAL_RADIUS_GRID: usize = 720;
/// Angular width at which golden-section refinement stops.
pub const NUMERICAL_RADIUS_ANGLE_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Real diagonal matrix.
pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { cr(values[i]) } else { cr(0.0) })
}

pub fn diag(values: &[Complex64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { values[i] } else { cr(0.0) })
}

/// Builds a matrix from real row-major nested rows.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(m, n, |i, j| cr(rows[i][j]))
}

pub fn scalar(z: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, z)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Spectral (operator 2-) norm. Empty matrices have norm zero.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// (X + X*)/2
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn require_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn require_same_shape(a: &ComplexMatrix, b: &ComplexMatrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{what}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted
/// ascending. The input is symmetrized before decomposing.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn lambda_max(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(0.0)
}

pub fn lambda_min(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Complex Schur form `M = Q T Q*` with `T` upper triangular.
pub fn schur(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    if m.nrows() == 0 {
        return (zeros(0, 0), zeros(0, 0));
    }
    m.clone().schur().unpack()
}

/// Eigenvalues of a general square matrix, read off the complex Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<Complex64> {
    let (_, t) = schur(m);
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Hermitian PSD square root.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    require_square(m, "psd_sqrt input")?;
    let norm = op_norm(m);
    let skew = op_norm(&(m - m.adjoint()));
    if skew > tol * norm.max(f64::MIN_POSITIVE) && skew > 0.0 {
        return Err(Error::NotHermitian { residual: skew });
    }
    let (values, vectors) = hermitian_eigen(m);
    if let Some(&min) = values.first() {
        if min < -tol {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
    }
    let roots: Vec<f64> = values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(&vectors * diag_real(&roots) * vectors.adjoint())
}

/// Defect data of a contraction: `D_P = (I - P*P)^{1/2}` together with an
/// orthonormal basis of its range.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectData {
    pub source: ComplexMatrix,
    pub defect_op: ComplexMatrix,
    /// n x r, orthonormal columns spanning the range of `defect_op`.
    pub basis: ComplexMatrix,
    /// Retained eigenvalues of `I - P*P`, matching the columns of `basis`.
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
    pub rank_tol: f64,
}

impl DefectData {
    pub fn dim(&self) -> usize {
        self.source.ncols()
    }

    /// `D_P` expressed as a map from the ambient space into defect
    /// coordinates, i.e. `basis* D_P` (r x n).
    pub fn to_coords(&self) -> ComplexMatrix {
        self.basis.adjoint() * &self.defect_op
    }

    /// Lifts an r x r coordinate operator to the ambient space.
    pub fn lift(&self, coords: &ComplexMatrix) -> ComplexMatrix {
        &self.basis * coords * self.basis.adjoint()
    }

    /// Orthogonal projection onto the defect space.
    pub fn projection(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }
}

pub fn default_rank_tol(n: usize) -> f64 {
    1e-9 * (n.max(1) as f64)
}

/// Computes the defect operator and defect space of `p`.
pub fn defect(p: &ComplexMatrix, rank_tol: f64) -> Result<DefectData> {
    let n = require_square(p, "contraction")?;
    let norm = op_norm(p);
    if norm > 1.0 + rank_tol {
        return Err(Error::NotContraction { norm });
    }
    let gram = identity(n) - p.adjoint() * p;
    Ok(defect_from_gram(p.clone(), &gram, rank_tol))
}

/// Defect data for a given positive semidefinite `gram` (the square of the
/// defect operator). `source` is recorded as is.
pub fn defect_from_gram(source: ComplexMatrix, gram: &ComplexMatrix, rank_tol: f64) -> DefectData {
    let n = gram.nrows();
    let (values, vectors) = hermitian_eigen(gram);
    // Eigenvalues at or below the rank tolerance count as exact zeros.
    let roots: Vec<f64> = values
        .iter()
        .map(|&l| if l > rank_tol { l.sqrt() } else { 0.0 })
        .collect();
    let defect_op = &vectors * diag_real(&roots) * vectors.adjoint();
    let kept: Vec<usize> = (0..n).filter(|&k| values[k] > rank_tol).collect();
    let basis = ComplexMatrix::from_fn(n, kept.len(), |i, j| vectors[(i, kept[j])]);
    DefectData {
        source,
        defect_op,
        basis,
        eigenvalues: kept.iter().map(|&k| values[k]).collect(),
        rank: kept.len(),
        rank_tol,
    }
}

/// `λ_max(Re(e^{iθ} T))`
pub fn rotated_lambda_max(t: &ComplexMatrix, theta: f64) -> f64 {
    lambda_max(&hermitian_part(&t.scale_complex(theta)))
}

trait ScaleComplex {
    fn scale_complex(&self, theta: f64) -> ComplexMatrix;
}

impl ScaleComplex for ComplexMatrix {
    fn scale_complex(&self, theta: f64) -> ComplexMatrix {
        self * Complex64::from_polar(1.0, theta)
    }
}

/// Numerical radius `sup |<Tx, x>|` over unit vectors.
///
/// Maximizes `λ_max(Re(e^{iθ}T))` over a 720-point grid and refines the
/// three best grid points by golden-section search down to an angular
/// width of `angle_tol`.
pub fn numerical_radius(t: &ComplexMatrix, angle_tol: f64) -> Result<f64> {
    let n = require_square(t, "numerical_radius input")?;
    if n == 0 {
        return Ok(0.0);
    }
    if n == 1 {
        return Ok(t[(0, 0)].norm());
    }
    let step = std::f64::consts::TAU / NUMERICAL_RADIUS_GRID as f64;
    let samples: Vec<f64> = (0..NUMERICAL_RADIUS_GRID)
        .map(|k| rotated_lambda_max(t, k as f64 * step))
        .collect();
    let mut order: Vec<usize> = (0..NUMERICAL_RADIUS_GRID).collect();
    order.sort_by(|&a, &b| samples[b].total_cmp(&samples[a]));
    let mut best = samples[order[0]];
    let angle_tol = angle_tol.max(1e-14);
    for &k in order.iter().take(3) {
        let lo = (k as f64 - 1.0) * step;
        let hi = (k as f64 + 1.0) * step;
        best = best.max(golden_max(|th| rotated_lambda_max(t, th), lo, hi, angle_tol));
    }
    Ok(best.max(0.0))
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = f1.max(f2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
        best = best.max(f1).max(f2);
    }
    best
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(t: &ComplexMatrix) -> Result<f64> {
    require_square(t, "spectral_radius input")?;
    Ok(eigenvalues(t).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `left.basis* · M · right.basis`
pub fn restrict_to_defect(
    m: &ComplexMatrix,
    left: &DefectData,
    right: &DefectData,
) -> Result<ComplexMatrix> {
    if m.nrows() != left.basis.nrows() || m.ncols() != right.basis.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "operator is {}x{}, defect spaces live in dims {} and {}",
            m.nrows(),
            m.ncols(),
            left.basis.nrows(),
            right.basis.nrows()
        )));
    }
    Ok(left.basis.adjoint() * m * &right.basis)
}

/// Orthonormal basis of the column space, cut at `tol · max(1, σ_max)`.
pub fn orthonormal_range(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = tol * top.max(1.0);
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > cut)
        .collect();
    ComplexMatrix::from_fn(rows, kept.len(), |i, j| u[(i, kept[j])])
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `q` inside `C^{q.nrows()}`.
pub fn orthogonal_complement(q: &ComplexMatrix) -> ComplexMatrix {
    let n = q.nrows();
    let proj = identity(n) - q * q.adjoint();
    let (values, vectors) = hermitian_eigen(&proj);
    let kept: Vec<usize> = (0..n).filter(|&k| values[k] > 0.5).collect();
    ComplexMatrix::from_fn(n, kept.len(), |i, j| vectors[(i, kept[j])])
}

/// Orthonormal basis of the kernel of `m`.
pub fn null_space(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return identity(cols);
    }
    let row_space = orthonormal_range(&m.adjoint(), tol);
    orthogonal_complement(&row_space)
}

/// Pseudoinverse of a Hermitian PSD matrix on the span of eigenvectors
/// whose eigenvalues exceed `tol`.
pub fn psd_pinv(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let inv: Vec<f64> = values
        .iter()
        .map(|&l| if l > tol { 1.0 / l } else { 0.0 })
        .collect();
    &vectors * diag_real(&inv) * vectors.adjoint()
}

/// Residual `‖U*U - I‖ + ‖UU* - I‖`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    let n = u.nrows();
    op_norm(&(u.adjoint() * u - identity(u.ncols()))) + op_norm(&(u * u.adjoint() - identity(n)))
}

pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    op_norm(&(a * b - b * a))
}

/// `M^k`, with `M^0 = I`.
pub fn matrix_power(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let mut out = identity(m.nrows());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// JSON carrier `{"rows": m, "cols": n, "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let re = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
            .collect();
        let im = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
            .collect();
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            re,
            im: Some(im),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let check = |rows: &Vec<Vec<f64>>, part: &str| -> Result<()> {
            if rows.len() != j.rows || rows.iter().any(|r| r.len() != j.cols) {
                return Err(Error::InvalidInput(format!(
                    "\"{part}\" must be {}x{} nested rows",
                    j.rows, j.cols
                )));
            }
            if rows.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("\"{part}\" has non-finite entries")));
            }
            Ok(())
        };
        check(&j.re, "re")?;
        if let Some(im) = &j.im {
            check(im, "im")?;
        }
        Ok(ComplexMatrix::from_fn(j.rows, j.cols, |r, col| {
            let im = j.im.as_ref().map_or(0.0, |im| im[r][col]);
            c(j.re[r][col], im)
        }))
    }
}

/// `#[serde(with = "matrix_json")]` adapter for [`ComplexMatrix`] fields.
pub mod matrix_json {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        ComplexMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}
