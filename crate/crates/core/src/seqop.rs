//! Banded block operators on block sequence spaces.
//!
//! A [`SeqOperator`] acts on `⋯ ⊕ E₋ ⊕ E₋ ⊕ H ⊕ E₊ ⊕ E₊ ⊕ ⋯` (two-sided) or
//! on `H ⊕ E₊ ⊕ E₊ ⊕ ⋯` (one-sided). It stores the blocks of the rows
//! `|row| ≤ radius` explicitly; every row beyond the window repeats a fixed
//! pattern of blocks indexed by the diagonal offset `col - row`. Because
//! the operator is banded and eventually Toeplitz, applying it to a finitely
//! supported vector is exact, and two operators are equal iff their windows
//! (on a common radius) and their tails agree.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::{self, ComplexMatrix, ComplexVector, MatrixJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    TwoSided,
    OneSidedNonneg,
}

/// Slot dimensions of a block sequence space.
///
/// Index 0 is the center slot. A one-sided layout has no negative indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotLayout {
    pub negative_slot_dim: usize,
    pub center_dim: usize,
    pub positive_slot_dim: usize,
    pub sidedness: Sidedness,
}

impl SlotLayout {
    pub fn two_sided(negative: usize, center: usize, positive: usize) -> Self {
        SlotLayout {
            negative_slot_dim: negative,
            center_dim: center,
            positive_slot_dim: positive,
            sidedness: Sidedness::TwoSided,
        }
    }

    pub fn one_sided(center: usize, positive: usize) -> Self {
        SlotLayout {
            negative_slot_dim: 0,
            center_dim: center,
            positive_slot_dim: positive,
            sidedness: Sidedness::OneSidedNonneg,
        }
    }

    pub fn contains(&self, index: i64) -> bool {
        index >= 0 || self.sidedness == Sidedness::TwoSided
    }

    pub fn slot_dim(&self, index: i64) -> usize {
        match index {
            0 => self.center_dim,
            i if i > 0 => self.positive_slot_dim,
            _ => self.negative_slot_dim,
        }
    }

    pub fn is_two_sided(&self) -> bool {
        self.sidedness == Sidedness::TwoSided
    }

    /// Total dimension of the slots with indices in `lo..=hi`.
    pub fn window_dim(&self, lo: i64, hi: i64) -> usize {
        (lo..=hi)
            .filter(|&i| self.contains(i))
            .map(|i| self.slot_dim(i))
            .sum()
    }
}

/// A finitely supported vector in a block sequence space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteVector {
    pub layout: SlotLayout,
    pub blocks: BTreeMap<i64, ComplexVector>,
}

impl FiniteVector {
    pub fn zero(layout: SlotLayout) -> Self {
        FiniteVector {
            layout,
            blocks: BTreeMap::new(),
        }
    }

    pub fn from_blocks(
        layout: SlotLayout,
        blocks: impl IntoIterator<Item = (i64, ComplexVector)>,
    ) -> Result<Self> {
        let mut v = FiniteVector::zero(layout);
        for (i, b) in blocks {
            if !layout.contains(i) {
                return Err(Error::LayoutMismatch(format!("index {i} is outside the layout")));
            }
            if b.len() != layout.slot_dim(i) {
                return Err(Error::LayoutMismatch(format!(
                    "block {i} has length {} but the slot has dimension {}",
                    b.len(),
                    layout.slot_dim(i)
                )));
            }
            v.blocks.insert(i, b);
        }
        Ok(v)
    }

    /// `δ_index ⊗ e_k`
    pub fn unit(layout: SlotLayout, index: i64, k: usize) -> Result<Self> {
        let dim = layout.slot_dim(index);
        if k >= dim {
            return Err(Error::LayoutMismatch(format!(
                "component {k} out of range for slot {index} of dimension {dim}"
            )));
        }
        let mut b = ComplexVector::zeros(dim);
        b[k] = Complex64::new(1.0, 0.0);
        Self::from_blocks(layout, [(index, b)])
    }

    /// Embeds a center vector as `δ_0 ⊗ h`.
    pub fn center(layout: SlotLayout, h: ComplexVector) -> Result<Self> {
        Self::from_blocks(layout, [(0, h)])
    }

    pub fn block(&self, index: i64) -> ComplexVector {
        self.blocks
            .get(&index)
            .cloned()
            .unwrap_or_else(|| ComplexVector::zeros(self.layout.slot_dim(index)))
    }

    pub fn norm(&self) -> f64 {
        self.blocks.values().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    /// `<self, other>`, linear in the first argument.
    pub fn inner(&self, other: &FiniteVector) -> Complex64 {
        self.blocks
            .iter()
            .filter_map(|(i, a)| other.blocks.get(i).map(|b| b.dotc(a)))
            .sum()
    }

    pub fn add_scaled(&self, other: &FiniteVector, alpha: Complex64) -> FiniteVector {
        let mut out = self.clone();
        for (i, b) in &other.blocks {
            let entry = out
                .blocks
                .entry(*i)
                .or_insert_with(|| ComplexVector::zeros(b.len()));
            *entry += b * alpha;
        }
        out
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = *self.blocks.keys().next()?;
        let hi = *self.blocks.keys().next_back()?;
        Some((lo, hi))
    }

    /// Coordinates of the slots `lo..=hi` stacked into one column.
    pub fn window_coords(&self, lo: i64, hi: i64) -> ComplexVector {
        let dim = self.layout.window_dim(lo, hi);
        let mut out = ComplexVector::zeros(dim);
        let mut at = 0;
        for i in (lo..=hi).filter(|&i| self.layout.contains(i)) {
            let d = self.layout.slot_dim(i);
            if let Some(b) = self.blocks.get(&i) {
                out.rows_mut(at, d).copy_from(b);
            }
            at += d;
        }
        out
    }
}

/// Eventually-Toeplitz banded block operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqOperator {
    layout_in: SlotLayout,
    layout_out: SlotLayout,
    radius: i64,
    window: BTreeMap<(i64, i64), ComplexMatrix>,
    left_tail: BTreeMap<i64, ComplexMatrix>,
    right_tail: BTreeMap<i64, ComplexMatrix>,
}

/// Incremental constructor for [`SeqOperator`]; validation happens in
/// [`SeqOperatorBuilder::build`].
#[derive(Debug, Clone)]
pub struct SeqOperatorBuilder {
    op: SeqOperator,
}

impl SeqOperatorBuilder {
    /// Sets the window block at `(row, col)`, replacing any previous one.
    pub fn block(mut self, row: i64, col: i64, m: ComplexMatrix) -> Self {
        self.op.window.insert((row, col), m);
        self
    }

    /// Sets the block repeated at offset `col - row` for rows below the
    /// window.
    pub fn left_tail(mut self, offset: i64, m: ComplexMatrix) -> Self {
        self.op.left_tail.insert(offset, m);
        self
    }

    /// Sets the block repeated at offset `col - row` for rows above the
    /// window.
    pub fn right_tail(mut self, offset: i64, m: ComplexMatrix) -> Self {
        self.op.right_tail.insert(offset, m);
        self
    }

    /// Fills every window row in `rows` beyond the center with the tail
    /// pattern of its side.
    pub fn tail_rows_in_window(mut self, rows: impl IntoIterator<Item = i64>) -> Self {
        for r in rows {
            let tail = if r < 0 {
                &self.op.left_tail
            } else {
                &self.op.right_tail
            };
            let fill: Vec<(i64, ComplexMatrix)> =
                tail.iter().map(|(o, m)| (r + o, m.clone())).collect();
            for (col, m) in fill {
                self.op.window.insert((r, col), m);
            }
        }
        self
    }

    pub fn build(self) -> Result<SeqOperator> {
        self.op.validate()?;
        Ok(self.op)
    }
}

fn shape_err(what: String) -> Error {
    Error::LayoutMismatch(what)
}

impl SeqOperator {
    pub fn builder(layout_in: SlotLayout, layout_out: SlotLayout, radius: i64) -> SeqOperatorBuilder {
        SeqOperatorBuilder {
            op: SeqOperator {
                layout_in,
                layout_out,
                radius: radius.max(0),
                window: BTreeMap::new(),
                left_tail: BTreeMap::new(),
                right_tail: BTreeMap::new(),
            },
        }
    }

    pub fn identity(layout: SlotLayout) -> SeqOperator {
        let mut b = SeqOperator::builder(layout, layout, 0).block(
            0,
            0,
            numlin::identity(layout.center_dim),
        );
        if layout.is_two_sided() {
            b = b.left_tail(0, numlin::identity(layout.negative_slot_dim));
        }
        b.right_tail(0, numlin::identity(layout.positive_slot_dim))
            .build()
            .expect("identity is well formed")
    }

    pub fn zero(layout_in: SlotLayout, layout_out: SlotLayout) -> SeqOperator {
        SeqOperator::builder(layout_in, layout_out, 0)
            .build()
            .expect("zero operator is well formed")
    }

    pub fn layout_in(&self) -> SlotLayout {
        self.layout_in
    }

    pub fn layout_out(&self) -> SlotLayout {
        self.layout_out
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn window(&self) -> &BTreeMap<(i64, i64), ComplexMatrix> {
        &self.window
    }

    pub fn left_tail(&self) -> &BTreeMap<i64, ComplexMatrix> {
        &self.left_tail
    }

    pub fn right_tail(&self) -> &BTreeMap<i64, ComplexMatrix> {
        &self.right_tail
    }

    fn validate(&self) -> Result<()> {
        let (lin, lout, w) = (self.layout_in, self.layout_out, self.radius);
        if lin.sidedness != lout.sidedness {
            return Err(shape_err("input and output layouts differ in sidedness".into()));
        }
        for (&(r, col), m) in &self.window {
            if r.abs() > w || !lout.contains(r) || !lin.contains(col) {
                return Err(shape_err(format!("window block ({r},{col}) out of range")));
            }
            let want = (lout.slot_dim(r), lin.slot_dim(col));
            if m.shape() != want {
                return Err(shape_err(format!(
                    "window block ({r},{col}) is {:?}, expected {want:?}",
                    m.shape()
                )));
            }
        }
        if !lout.is_two_sided() && !self.left_tail.is_empty() {
            return Err(shape_err("one-sided operator with a left tail".into()));
        }
        for (&o, m) in &self.left_tail {
            // Tail rows are < -w, so their columns stay negative iff o <= w.
            if o > w {
                return Err(shape_err(format!("left tail offset {o} reaches the center")));
            }
            let want = (lout.negative_slot_dim, lin.negative_slot_dim);
            if m.shape() != want {
                return Err(shape_err(format!("left tail block {o} has shape {:?}", m.shape())));
            }
        }
        for (&o, m) in &self.right_tail {
            if o < -w {
                return Err(shape_err(format!("right tail offset {o} reaches the center")));
            }
            let want = (lout.positive_slot_dim, lin.positive_slot_dim);
            if m.shape() != want {
                return Err(shape_err(format!("right tail block {o} has shape {:?}", m.shape())));
            }
        }
        if self.window.values().chain(self.left_tail.values()).chain(self.right_tail.values())
            .any(|m| !numlin::is_finite(m))
        {
            return Err(Error::InvalidInput("non-finite block".into()));
        }
        Ok(())
    }

    /// Largest `|col - row|` over all stored blocks.
    pub fn band(&self) -> i64 {
        self.window
            .keys()
            .map(|&(r, c)| (c - r).abs())
            .chain(self.left_tail.keys().map(|o| o.abs()))
            .chain(self.right_tail.keys().map(|o| o.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Nonzero-pattern of row `row` as `(col, block)` pairs.
    pub fn row_blocks(&self, row: i64) -> Vec<(i64, &ComplexMatrix)> {
        if !self.layout_out.contains(row) {
            return Vec::new();
        }
        if row.abs() <= self.radius {
            self.window
                .range((row, i64::MIN)..=(row, i64::MAX))
                .map(|(&(_, c), m)| (c, m))
                .collect()
        } else {
            let tail = if row < 0 {
                &self.left_tail
            } else {
                &self.right_tail
            };
            tail.iter().map(|(o, m)| (row + o, m)).collect()
        }
    }

    /// Block at `(row, col)`, or a zero block of the right shape.
    pub fn block(&self, row: i64, col: i64) -> ComplexMatrix {
        self.row_blocks(row)
            .into_iter()
            .find(|&(c, _)| c == col)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| {
                numlin::zeros(self.layout_out.slot_dim(row), self.layout_in.slot_dim(col))
            })
    }

    fn row_range(&self, lo: i64, hi: i64) -> impl Iterator<Item = i64> + '_ {
        (lo..=hi).filter(move |&r| self.layout_out.contains(r))
    }

    /// Exact application to a finitely supported vector.
    pub fn apply(&self, v: &FiniteVector) -> Result<FiniteVector> {
        if v.layout != self.layout_in {
            return Err(Error::LayoutMismatch("vector layout differs from operator input".into()));
        }
        let mut out = FiniteVector::zero(self.layout_out);
        let Some((lo, hi)) = v.support() else {
            return Ok(out);
        };
        let band = self.band();
        for row in self.row_range(lo - band, hi + band) {
            let mut acc: Option<ComplexVector> = None;
            for (col, m) in self.row_blocks(row) {
                if let Some(x) = v.blocks.get(&col) {
                    let y = m * x;
                    match acc.as_mut() {
                        Some(a) => *a += y,
                        None => acc = Some(y),
                    }
                }
            }
            if let Some(a) = acc {
                out.blocks.insert(row, a);
            }
        }
        Ok(out)
    }

    /// Exact application of the adjoint operator.
    pub fn adjoint_apply(&self, v: &FiniteVector) -> Result<FiniteVector> {
        if v.layout != self.layout_out {
            return Err(Error::LayoutMismatch("vector layout differs from operator output".into()));
        }
        let mut out = FiniteVector::zero(self.layout_in);
        for (&row, x) in &v.blocks {
            for (col, m) in self.row_blocks(row) {
                let y = m.adjoint() * x;
                out.blocks
                    .entry(col)
                    .and_modify(|a| *a += &y)
                    .or_insert(y);
            }
        }
        Ok(out)
    }

    /// The adjoint as a [`SeqOperator`].
    pub fn adjoint(&self) -> SeqOperator {
        let band = self.band();
        let radius = self.radius + band;
        let mut window = BTreeMap::new();
        for row in self.row_range(-radius - band, radius + band) {
            for (col, m) in self.row_blocks(row) {
                if col.abs() <= radius {
                    window.insert((col, row), m.adjoint());
                }
            }
        }
        SeqOperator {
            layout_in: self.layout_out,
            layout_out: self.layout_in,
            radius,
            window,
            left_tail: self.left_tail.iter().map(|(o, m)| (-o, m.adjoint())).collect(),
            right_tail: self.right_tail.iter().map(|(o, m)| (-o, m.adjoint())).collect(),
        }
    }

    pub fn scale(&self, alpha: Complex64) -> SeqOperator {
        let f = |m: &ComplexMatrix| m * alpha;
        SeqOperator {
            layout_in: self.layout_in,
            layout_out: self.layout_out,
            radius: self.radius,
            window: self.window.iter().map(|(k, m)| (*k, f(m))).collect(),
            left_tail: self.left_tail.iter().map(|(k, m)| (*k, f(m))).collect(),
            right_tail: self.right_tail.iter().map(|(k, m)| (*k, f(m))).collect(),
        }
    }

    /// `self + other`
    pub fn add(&self, other: &SeqOperator) -> Result<SeqOperator> {
        if self.layout_in != other.layout_in || self.layout_out != other.layout_out {
            return Err(Error::LayoutMismatch("sum of operators on different layouts".into()));
        }
        let radius = self.radius.max(other.radius);
        let mut window: BTreeMap<(i64, i64), ComplexMatrix> = BTreeMap::new();
        for row in self.row_range(-radius, radius) {
            for op in [self, other] {
                for (col, m) in op.row_blocks(row) {
                    window
                        .entry((row, col))
                        .and_modify(|a| *a += m)
                        .or_insert_with(|| m.clone());
                }
            }
        }
        let merge = |a: &BTreeMap<i64, ComplexMatrix>, b: &BTreeMap<i64, ComplexMatrix>| {
            let mut out = a.clone();
            for (o, m) in b {
                out.entry(*o).and_modify(|x| *x += m).or_insert_with(|| m.clone());
            }
            out
        };
        Ok(SeqOperator {
            layout_in: self.layout_in,
            layout_out: self.layout_out,
            radius,
            window,
            left_tail: merge(&self.left_tail, &other.left_tail),
            right_tail: merge(&self.right_tail, &other.right_tail),
        })
    }

    /// `self - other`
    pub fn sub(&self, other: &SeqOperator) -> Result<SeqOperator> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest block norm difference between the outermost window rows and
    /// the tail pattern continuing them. Zero means the window joins its
    /// tails without a seam.
    pub fn seam_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let w = self.radius;
        if w == 0 {
            return 0.0;
        }
        let mut edges = vec![(w, &self.right_tail)];
        if self.layout_out.is_two_sided() {
            edges.push((-w, &self.left_tail));
        }
        for (row, tail) in edges {
            let cols: BTreeSet<i64> = self
                .row_blocks(row)
                .iter()
                .map(|&(c, _)| c)
                .chain(tail.keys().map(|o| row + o))
                .collect();
            for col in cols {
                // Only columns on the tail side of the center are comparable.
                if col == 0 || (col < 0) != (row < 0) {
                    continue;
                }
                let expected = tail.get(&(col - row)).cloned().unwrap_or_else(|| {
                    numlin::zeros(self.layout_out.slot_dim(row), self.layout_in.slot_dim(col))
                });
                worst = worst.max(numlin::op_norm(&(self.block(row, col) - expected)));
            }
        }
        worst
    }

    /// Largest block norm outside the square `[lo, hi] x [lo, hi]`,
    /// including every tail block. Zero iff the operator is supported on
    /// the slots `lo..=hi`.
    pub fn off_block_norm(&self, lo: i64, hi: i64) -> f64 {
        let reach = self.radius.max(lo.abs()).max(hi.abs()) + self.band();
        let inside = |i: i64| (lo..=hi).contains(&i);
        let mut worst: f64 = 0.0;
        for row in self.row_range(-reach, reach) {
            for (col, m) in self.row_blocks(row) {
                if !(inside(row) && inside(col)) {
                    worst = worst.max(numlin::op_norm(m));
                }
            }
        }
        self.left_tail
            .values()
            .chain(self.right_tail.values())
            .map(numlin::op_norm)
            .fold(worst, f64::max)
    }

    /// Dense matrix of the blocks with rows in `rows` and columns in `cols`.
    pub fn to_dense(&self, rows: (i64, i64), cols: (i64, i64)) -> ComplexMatrix {
        let row_idx: Vec<i64> = (rows.0..=rows.1).filter(|&r| self.layout_out.contains(r)).collect();
        let col_idx: Vec<i64> = (cols.0..=cols.1).filter(|&c| self.layout_in.contains(c)).collect();
        let offsets = |idx: &[i64], layout: SlotLayout| {
            let mut at = 0;
            idx.iter()
                .map(|&i| {
                    let o = at;
                    at += layout.slot_dim(i);
                    (i, o)
                })
                .collect::<BTreeMap<i64, usize>>()
        };
        let ro = offsets(&row_idx, self.layout_out);
        let co = offsets(&col_idx, self.layout_in);
        let nr = self.layout_out.window_dim(rows.0, rows.1);
        let nc = self.layout_in.window_dim(cols.0, cols.1);
        let mut out = numlin::zeros(nr, nc);
        for &r in &row_idx {
            for (c, m) in self.row_blocks(r) {
                if let Some(&oc) = co.get(&c) {
                    out.view_mut((ro[&r], oc), m.shape()).copy_from(m);
                }
            }
        }
        out
    }
}

/// Product `a · b`.
///
/// The window of the result covers at least `radius` and extends far
/// enough beyond both factors' windows that its outermost rows already
/// follow the product tails.
pub fn compose_window(a: &SeqOperator, b: &SeqOperator, radius: i64) -> Result<SeqOperator> {
    if a.layout_in != b.layout_out {
        return Err(Error::LayoutMismatch("composition of incompatible layouts".into()));
    }
    let (ba, bb) = (a.band(), b.band());
    let w = radius.max(a.radius.max(b.radius) + ba + bb + 1);
    let mut window: BTreeMap<(i64, i64), ComplexMatrix> = BTreeMap::new();
    for row in a.row_range(-w, w) {
        for (mid, am) in a.row_blocks(row) {
            for (col, bm) in b.row_blocks(mid) {
                let prod = am * bm;
                window
                    .entry((row, col))
                    .and_modify(|x| *x += &prod)
                    .or_insert(prod);
            }
        }
    }
    let tail_product = |ta: &BTreeMap<i64, ComplexMatrix>, tb: &BTreeMap<i64, ComplexMatrix>| {
        let mut out: BTreeMap<i64, ComplexMatrix> = BTreeMap::new();
        for (oa, am) in ta {
            for (ob, bm) in tb {
                let prod = am * bm;
                out.entry(oa + ob).and_modify(|x| *x += &prod).or_insert(prod);
            }
        }
        out
    };
    let op = SeqOperator {
        layout_in: b.layout_in,
        layout_out: a.layout_out,
        radius: w,
        window,
        left_tail: tail_product(&a.left_tail, &b.left_tail),
        right_tail: tail_product(&a.right_tail, &b.right_tail),
    };
    op.validate()?;
    Ok(op)
}

/// Largest block-norm difference between two operators, over the window
/// rows of both and all tail offsets. By eventual periodicity this is the
/// largest block difference of the full infinite operators.
pub fn structural_distance(a: &SeqOperator, b: &SeqOperator) -> Result<f64> {
    if a.layout_in != b.layout_in || a.layout_out != b.layout_out {
        return Err(Error::LayoutMismatch("comparison of operators on different layouts".into()));
    }
    let radius = a.radius.max(b.radius);
    let mut worst: f64 = 0.0;
    for row in a.row_range(-radius, radius) {
        let cols: BTreeSet<i64> = a
            .row_blocks(row)
            .into_iter()
            .chain(b.row_blocks(row))
            .map(|(c, _)| c)
            .collect();
        for col in cols {
            worst = worst.max(numlin::op_norm(&(a.block(row, col) - b.block(row, col))));
        }
    }
    let tail_gap = |ta: &BTreeMap<i64, ComplexMatrix>, tb: &BTreeMap<i64, ComplexMatrix>| {
        let offsets: BTreeSet<i64> = ta.keys().chain(tb.keys()).copied().collect();
        offsets
            .into_iter()
            .map(|o| match (ta.get(&o), tb.get(&o)) {
                (Some(x), Some(y)) => numlin::op_norm(&(x - y)),
                (Some(x), None) | (None, Some(x)) => numlin::op_norm(x),
                (None, None) => 0.0,
            })
            .fold(0.0, f64::max)
    };
    worst = worst
        .max(tail_gap(&a.left_tail, &b.left_tail))
        .max(tail_gap(&a.right_tail, &b.right_tail));
    Ok(worst)
}

pub fn structural_equal(a: &SeqOperator, b: &SeqOperator, tol: f64) -> Result<bool> {
    Ok(structural_distance(a, b)? <= tol)
}

/// Repeated application `op^k v`.
pub fn apply_power(op: &SeqOperator, v: &FiniteVector, k: usize) -> Result<FiniteVector> {
    let mut out = v.clone();
    for _ in 0..k {
        out = op.apply(&out)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SeqOperatorJson {
    layout_in: SlotLayout,
    layout_out: SlotLayout,
    radius: i64,
    window: BTreeMap<String, MatrixJson>,
    left_tail: BTreeMap<String, MatrixJson>,
    right_tail: BTreeMap<String, MatrixJson>,
}

fn parse_index(s: &str) -> Result<i64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad index {s:?}")))
}

impl Serialize for SeqOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tail = |t: &BTreeMap<i64, ComplexMatrix>| {
            t.iter().map(|(o, m)| (o.to_string(), MatrixJson::from(m))).collect()
        };
        SeqOperatorJson {
            layout_in: self.layout_in,
            layout_out: self.layout_out,
            radius: self.radius,
            window: self
                .window
                .iter()
                .map(|((r, c), m)| (format!("{r},{c}"), MatrixJson::from(m)))
                .collect(),
            left_tail: tail(&self.left_tail),
            right_tail: tail(&self.right_tail),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SeqOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SeqOperatorJson::deserialize(d)?;
        let conv = || -> Result<SeqOperator> {
            let mut b = SeqOperator::builder(j.layout_in, j.layout_out, j.radius);
            for (k, m) in j.window {
                let (r, c) = k
                    .split_once(',')
                    .ok_or_else(|| Error::InvalidInput(format!("bad window key {k:?}")))?;
                b = b.block(parse_index(r)?, parse_index(c)?, ComplexMatrix::try_from(m)?);
            }
            for (k, m) in j.left_tail {
                b = b.left_tail(parse_index(&k)?, ComplexMatrix::try_from(m)?);
            }
            for (k, m) in j.right_tail {
                b = b.right_tail(parse_index(&k)?, ComplexMatrix::try_from(m)?);
            }
            b.build()
        };
        conv().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FiniteVectorJson {
    layout: SlotLayout,
    blocks: BTreeMap<String, BlockJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BlockJson {
    re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<f64>>,
}

impl Serialize for FiniteVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FiniteVectorJson {
            layout: self.layout,
            blocks: self
                .blocks
                .iter()
                .map(|(i, b)| {
                    (
                        i.to_string(),
                        BlockJson {
                            re: b.iter().map(|z| z.re).collect(),
                            im: Some(b.iter().map(|z| z.im).collect()),
                        },
                    )
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FiniteVectorJson::deserialize(d)?;
        let conv = || -> Result<FiniteVector> {
            let mut blocks = Vec::new();
            for (k, b) in j.blocks {
                if b.im.as_ref().is_some_and(|im| im.len() != b.re.len()) {
                    return Err(Error::InvalidInput(format!("block {k}: re/im length mismatch")));
                }
                let v = ComplexVector::from_fn(b.re.len(), |i, _| {
                    Complex64::new(b.re[i], b.im.as_ref().map_or(0.0, |im| im[i]))
                });
                blocks.push((parse_index(&k)?, v));
            }
            FiniteVector::from_blocks(j.layout, blocks)
        };
        conv().map_err(serde::de::Error::custom)
    }
}
