//! Dense GF(2) matrices with rows packed into 64-bit words.

use crate::linalg::sparse::SparseMatrix;
use crate::ring::{Coeff, Gf2};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    nrows: usize,
    ncols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        let words_per_row = ncols.div_ceil(64);
        Self { nrows, ncols, words_per_row, bits: vec![0; nrows * words_per_row] }
    }

    pub fn from_sparse(m: &SparseMatrix<Gf2>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for (j, col) in m.columns().iter().enumerate() {
            for (i, v) in col.iter() {
                if !v.is_zero() {
                    out.set(*i, j, true);
                }
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        let w = self.bits[i * self.words_per_row + j / 64];
        (w >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let w = &mut self.bits[i * self.words_per_row + j / 64];
        if value {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        self.bits[i * self.words_per_row + j / 64] ^= 1 << (j % 64);
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words_per_row;
        let (a, b) = if src < dst {
            let (lo, hi) = self.bits.split_at_mut(dst * w);
            (&lo[src * w..src * w + w], &mut hi[..w])
        } else {
            let (lo, hi) = self.bits.split_at_mut(src * w);
            (&hi[..w], &mut lo[dst * w..dst * w + w])
        };
        for (d, s) in b.iter_mut().zip(a) {
            *d ^= *s;
        }
    }

    /// Rank by row echelon elimination; consumes a copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.ncols {
            let Some(pivot) = (rank..m.nrows).find(|&r| m.get(r, col)) else { continue };
            if pivot != rank {
                m.swap_rows(pivot, rank);
            }
            for r in rank + 1..m.nrows {
                if m.get(r, col) {
                    m.xor_row_into(rank, r);
                }
            }
            rank += 1;
            if rank == m.nrows {
                break;
            }
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        let w = self.words_per_row;
        for k in 0..w {
            self.bits.swap(a * w + k, b * w + k);
        }
    }
}
