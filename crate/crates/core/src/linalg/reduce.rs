//! Exact column reduction over a field.
//!
//! Columns are reduced left to right; a column's pivot is its largest row
//! index. Pivot choice is therefore fixed by column order, which keeps every
//! result reproducible.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::sparse::{SparseMatrix, SparseVec};
use crate::ring::Field;

/// Incrementally built basis in echelon form (distinct pivots).
///
/// Each stored vector carries an optional tag; reducing a vector reports the
/// coefficients used on tagged members, which is how cohomology classes
/// and solution vectors are read off.
#[derive(Clone, Debug)]
pub struct PivotBasis<F> {
    vectors: Vec<SparseVec<F>>,
    tags: Vec<Option<usize>>,
    pivot_of: HashMap<usize, usize>,
}

/// Outcome of reducing a vector against a [`PivotBasis`].
#[derive(Clone, Debug)]
pub struct Reduction<F> {
    pub residual: SparseVec<F>,
    /// `v = residual + sum_k coeffs[k] * stored[k]`, keyed by stored position.
    pub coeffs: SparseVec<F>,
}

impl<F: Field> Default for PivotBasis<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Field> PivotBasis<F> {
    pub fn new() -> Self {
        Self {
            vectors: Vec::new(),
            tags: Vec::new(),
            pivot_of: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, k: usize) -> &SparseVec<F> {
        &self.vectors[k]
    }

    pub fn tag(&self, k: usize) -> Option<usize> {
        self.tags[k]
    }

    /// Reduces `v`, returning the residual and the stored-vector coefficients.
    pub fn reduce(&self, v: &SparseVec<F>) -> Reduction<F> {
        let mut coeffs: Vec<(usize, F)> = Vec::new();
        let residual = self.finish(v.clone(), &mut coeffs);
        Reduction { residual, coeffs: SparseVec::from_entries(coeffs) }
    }

    fn finish(&self, mut r: SparseVec<F>, coeffs: &mut Vec<(usize, F)>) -> SparseVec<F> {
        // Eliminate every entry sitting on a known pivot, top index first.
        let mut out: Vec<(usize, F)> = Vec::new();
        loop {
            let Some((p, val)) = r.pivot() else { break };
            match self.pivot_of.get(&p) {
                Some(&k) => {
                    let (_, lead) = self.vectors[k].pivot().unwrap();
                    let c = val.div(lead);
                    r.axpy(&c.neg(), &self.vectors[k]);
                    coeffs.push((k, c));
                }
                None => {
                    let (p, val) = (p, val.clone());
                    out.push((p, val.clone()));
                    r.axpy(&val.neg(), &SparseVec::unit(p));
                }
            }
        }
        SparseVec::from_entries(out)
    }

    /// Reduces `v` and stores the residual if it is nonzero. Returns the
    /// stored position, or `None` when `v` was already in the span.
    pub fn insert(&mut self, v: &SparseVec<F>, tag: Option<usize>) -> Option<usize> {
        let mut r = v.clone();
        while let Some((p, val)) = r.pivot() {
            let Some(&k) = self.pivot_of.get(&p) else { break };
            let (_, lead) = self.vectors[k].pivot().unwrap();
            let c = val.div(lead).neg();
            r.axpy(&c, &self.vectors[k]);
        }
        let (p, _) = r.pivot()?;
        let pos = self.vectors.len();
        self.pivot_of.insert(p, pos);
        self.vectors.push(r);
        self.tags.push(tag);
        Some(pos)
    }
}

/// Result of exact elimination: rank and bases of kernel and image.
#[derive(Clone, Debug)]
pub struct RankKernelImage<F> {
    pub rank: usize,
    pub kernel: Vec<SparseVec<F>>,
    pub image: Vec<SparseVec<F>>,
}

/// Column reduction `R = M V` with `V` unit upper triangular.
#[derive(Clone, Debug)]
pub struct ColumnReduction<F> {
    pub reduced: Vec<SparseVec<F>>,
    pub transform: Vec<SparseVec<F>>,
    pivot_of: HashMap<usize, usize>,
}

impl<F: Field> ColumnReduction<F> {
    pub fn new(m: &SparseMatrix<F>, track: bool) -> Self {
        Self::with_clearing(m, track, &[])
    }

    /// Like [`ColumnReduction::new`], but columns flagged in `cleared` are
    /// assumed to reduce to zero and are skipped. A column may be cleared when
    /// its index is a pivot row of the reduced previous map in a complex.
    pub fn with_clearing(m: &SparseMatrix<F>, track: bool, cleared: &[bool]) -> Self {
        let n = m.ncols();
        let mut reduced: Vec<SparseVec<F>> = Vec::with_capacity(n);
        let mut transform: Vec<SparseVec<F>> = Vec::with_capacity(if track { n } else { 0 });
        let mut pivot_of: HashMap<usize, usize> = HashMap::new();
        for j in 0..n {
            if cleared.get(j).copied().unwrap_or(false) {
                reduced.push(SparseVec::zero());
                if track {
                    transform.push(SparseVec::zero());
                }
                continue;
            }
            let mut r = m.column(j).clone();
            let mut v = if track { SparseVec::unit(j) } else { SparseVec::zero() };
            while let Some((p, val)) = r.pivot() {
                match pivot_of.get(&p) {
                    Some(&k) => {
                        let (_, lead) = reduced[k].pivot().unwrap();
                        let c = val.div(lead).neg();
                        r.axpy(&c, &reduced[k]);
                        if track {
                            let tk = transform[k].clone();
                            v.axpy(&c, &tk);
                        }
                    }
                    None => {
                        pivot_of.insert(p, j);
                        break;
                    }
                }
            }
            reduced.push(r);
            if track {
                transform.push(v);
            }
        }
        Self { reduced, transform, pivot_of }
    }

    pub fn rank(&self) -> usize {
        self.pivot_of.len()
    }

    pub fn pivot_column(&self, row: usize) -> Option<usize> {
        self.pivot_of.get(&row).copied()
    }

    /// Row indices that carry a pivot.
    pub fn pivot_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivot_of.keys().copied()
    }

    /// Solves `M x = z` if consistent. Requires tracking.
    pub fn solve(&self, z: &SparseVec<F>) -> Option<SparseVec<F>> {
        assert!(
            self.transform.len() == self.reduced.len(),
            "solve requires a tracked reduction"
        );
        let mut r = z.clone();
        let mut x = SparseVec::zero();
        while let Some((p, val)) = r.pivot() {
            let k = self.pivot_column(p)?;
            let (_, lead) = self.reduced[k].pivot().unwrap();
            let c = val.div(lead);
            r.axpy(&c.neg(), &self.reduced[k]);
            x.axpy(&c, &self.transform[k]);
        }
        Some(x)
    }
}

/// Rank, kernel basis and image basis of a matrix over a field.
pub fn rank_kernel_image<F: Field>(m: &SparseMatrix<F>) -> RankKernelImage<F> {
    let red = ColumnReduction::new(m, true);
    let mut kernel = Vec::new();
    let mut image = Vec::new();
    for (r, v) in red.reduced.iter().zip(&red.transform) {
        if r.is_zero() {
            kernel.push(v.clone());
        } else {
            image.push(r.clone());
        }
    }
    RankKernelImage { rank: image.len(), kernel, image }
}

/// Rank only; cheaper than [`rank_kernel_image`].
pub fn rank<F: Field>(m: &SparseMatrix<F>) -> usize {
    ColumnReduction::new(m, false).rank()
}

/// Finds `c` with `boundary * c = z` using only the columns allowed by
/// `column_mask`. Returns `Ok(None)` when no such `c` exists.
pub fn solve_in_subspace<F: Field>(
    boundary: &SparseMatrix<F>,
    z: &SparseVec<F>,
    column_mask: &[bool],
) -> Result<Option<SparseVec<F>>> {
    if column_mask.len() != boundary.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "mask has {} entries for {} columns",
            column_mask.len(),
            boundary.ncols()
        )));
    }
    if let Some(m) = z.max_index() {
        if m >= boundary.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side index {m} outside {} rows",
                boundary.nrows()
            )));
        }
    }
    let (sub, idx) = boundary.select_columns(column_mask);
    let red = ColumnReduction::new(&sub, true);
    Ok(red.solve(z).map(|x| x.reindex(|j| Some(idx[j]))))
}
