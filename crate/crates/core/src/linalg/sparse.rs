use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::ring::{Coeff, Ring};

/// Sparse vector: strictly increasing indices, no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVec<F> {
    entries: Vec<(usize, F)>,
}

/// A chain or cochain expressed in a fixed simplex basis.
pub type ChainVector<F> = SparseVec<F>;

impl<F: Coeff> Default for SparseVec<F> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<F: Coeff> SparseVec<F> {
    pub fn zero() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn unit(index: usize) -> Self {
        Self { entries: vec![(index, F::one())] }
    }

    /// Builds a vector from arbitrary `(index, value)` pairs, summing
    /// duplicates and dropping zeros.
    pub fn from_entries(mut raw: Vec<(usize, F)>) -> Self {
        raw.sort_by_key(|(i, _)| *i);
        let mut entries: Vec<(usize, F)> = Vec::with_capacity(raw.len());
        for (i, v) in raw {
            match entries.last_mut() {
                Some((j, acc)) if *j == i => acc.add_assign(&v),
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|(_, v)| !v.is_zero());
        Self { entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, F)> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &[(usize, F)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, F)> {
        self.entries
    }

    /// Largest index with a nonzero value (the reduction pivot).
    pub fn pivot(&self) -> Option<(usize, &F)> {
        self.entries.last().map(|(i, v)| (*i, v))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn get(&self, index: usize) -> F {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => F::zero(),
        }
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_sorted(self.entries.iter().map(|(i, v)| (*i, v.mul(c))).collect())
    }

    fn from_sorted(mut entries: Vec<(usize, F)>) -> Self {
        entries.retain(|(_, v)| !v.is_zero());
        Self { entries }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: &F, other: &Self) {
        if c.is_zero() || other.is_zero() {
            return;
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let mut a = std::mem::take(&mut self.entries).into_iter().peekable();
        let mut b = other.entries.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some((ia, _)), Some((ib, _))) => match ia.cmp(ib) {
                    Ordering::Less => out.push(a.next().unwrap()),
                    Ordering::Greater => {
                        let (ib, vb) = b.next().unwrap();
                        out.push((*ib, vb.mul(c)));
                    }
                    Ordering::Equal => {
                        let (ia, va) = a.next().unwrap();
                        let (_, vb) = b.next().unwrap();
                        let s = va.add(&vb.mul(c));
                        if !s.is_zero() {
                            out.push((ia, s));
                        }
                    }
                },
                (Some(_), None) => out.push(a.next().unwrap()),
                (None, Some(_)) => {
                    let (ib, vb) = b.next().unwrap();
                    out.push((*ib, vb.mul(c)));
                }
                (None, None) => break,
            }
        }
        out.retain(|(_, v)| !v.is_zero());
        self.entries = out;
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(&F::one(), other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(&F::one().neg(), other);
        out
    }

    /// Remaps indices; entries whose image is `None` are dropped.
    pub fn reindex(&self, map: impl Fn(usize) -> Option<usize>) -> Self {
        Self::from_entries(
            self.entries
                .iter()
                .filter_map(|(i, v)| map(*i).map(|j| (j, v.clone())))
                .collect(),
        )
    }

    pub fn dot(&self, other: &Self) -> F {
        let mut acc = F::zero();
        let (mut p, mut q) = (0, 0);
        while p < self.entries.len() && q < other.entries.len() {
            match self.entries[p].0.cmp(&other.entries[q].0) {
                Ordering::Less => p += 1,
                Ordering::Greater => q += 1,
                Ordering::Equal => {
                    acc.add_assign(&self.entries[p].1.mul(&other.entries[q].1));
                    p += 1;
                    q += 1;
                }
            }
        }
        acc
    }
}

/// Column-major sparse matrix over a coefficient ring.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<F> {
    nrows: usize,
    cols: Vec<SparseVec<F>>,
}

impl<F: Coeff> SparseMatrix<F> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, cols: vec![SparseVec::zero(); ncols] }
    }

    pub fn identity(n: usize) -> Self {
        Self { nrows: n, cols: (0..n).map(SparseVec::unit).collect() }
    }

    /// Panics if a column has an index outside `0..nrows`.
    pub fn from_columns(nrows: usize, cols: Vec<SparseVec<F>>) -> Self {
        for c in &cols {
            if let Some(m) = c.max_index() {
                assert!(m < nrows, "row index {m} out of range for {nrows} rows");
            }
        }
        Self { nrows, cols }
    }

    pub fn from_dense(rows: &[Vec<F>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let cols = (0..ncols)
            .map(|j| {
                SparseVec::from_entries(
                    (0..nrows).map(|i| (i, rows[i][j].clone())).collect(),
                )
            })
            .collect();
        Self { nrows, cols }
    }

    pub fn ring(&self) -> Ring {
        F::RING
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &SparseVec<F> {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[SparseVec<F>] {
        &self.cols
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(SparseVec::nnz).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.cols[j].get(i)
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Vec<(usize, F)>> = vec![Vec::new(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, v) in col.iter() {
                rows[*i].push((j, v.clone()));
            }
        }
        Self {
            nrows: self.cols.len(),
            cols: rows.into_iter().map(SparseVec::from_sorted).collect(),
        }
    }

    /// `self * x` where `x` is indexed by columns.
    pub fn mul_vec(&self, x: &SparseVec<F>) -> SparseVec<F> {
        let mut out = SparseVec::zero();
        for (j, c) in x.iter() {
            out.axpy(c, &self.cols[*j]);
        }
        out
    }

    pub fn mul(&self, other: &SparseMatrix<F>) -> SparseMatrix<F> {
        assert_eq!(self.ncols(), other.nrows, "incompatible product");
        Self {
            nrows: self.nrows,
            cols: other.cols.iter().map(|c| self.mul_vec(c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(SparseVec::is_zero)
    }

    pub fn to_dense(&self) -> Vec<Vec<F>> {
        let mut out = vec![vec![F::zero(); self.ncols()]; self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, v) in col.iter() {
                out[*i][j] = v.clone();
            }
        }
        out
    }

    /// Keeps the columns for which `keep` is true, in order.
    pub fn select_columns(&self, keep: &[bool]) -> (Self, Vec<usize>) {
        let idx: Vec<usize> = (0..self.ncols()).filter(|&j| keep[j]).collect();
        let cols = idx.iter().map(|&j| self.cols[j].clone()).collect();
        (Self { nrows: self.nrows, cols }, idx)
    }
}

/// Serializable coordinate form of a sparse matrix.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixRecord {
    pub ring: Ring,
    pub nrows: usize,
    pub ncols: usize,
    /// `(row, col, value)` triples, values in textual ring form.
    pub entries: Vec<(usize, usize, String)>,
}

impl<F: Coeff> From<&SparseMatrix<F>> for MatrixRecord {
    fn from(m: &SparseMatrix<F>) -> Self {
        let mut entries = Vec::with_capacity(m.nnz());
        for (j, col) in m.cols.iter().enumerate() {
            for (i, v) in col.iter() {
                entries.push((*i, j, v.to_repr()));
            }
        }
        MatrixRecord { ring: F::RING, nrows: m.nrows, ncols: m.ncols(), entries }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Gf2;
    use num_rational::BigRational;

    fn q(v: i64) -> BigRational {
        BigRational::from_i64(v)
    }

    #[test]
    fn axpy_cancels() {
        let mut a = SparseVec::from_entries(vec![(0, q(1)), (3, q(2))]);
        let b = SparseVec::from_entries(vec![(3, q(1)), (5, q(1))]);
        a.axpy(&q(-2), &b);
        assert_eq!(a.entries(), &[(0, q(1)), (5, q(-2))]);
    }

    #[test]
    fn from_entries_merges_duplicates() {
        let v = SparseVec::from_entries(vec![(2, Gf2::ONE), (1, Gf2::ONE), (2, Gf2::ONE)]);
        assert_eq!(v.entries(), &[(1, Gf2::ONE)]);
    }

    #[test]
    fn transpose_and_product() {
        let m = SparseMatrix::from_dense(&[vec![q(1), q(2)], vec![q(0), q(3)]]);
        let t = m.transpose();
        assert_eq!(t.get(1, 0), q(2));
        let p = m.mul(&t);
        assert_eq!(p.to_dense(), vec![vec![q(5), q(6)], vec![q(6), q(9)]]);
    }
}
