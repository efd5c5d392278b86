//! Smith normal form over the integers.
//!
//! Boundary matrices are mostly units, so the work is split in two: a sparse
//! phase eliminates unit pivots (each contributes an invariant factor 1 and
//! is a unimodular step), then the small residual block is diagonalized
//! densely with transforms tracked and checked.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::linalg::sparse::SparseMatrix;

/// Invariant factors `d1 | d2 | ...` (all positive) of an integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SnfResult {
    pub nrows: usize,
    pub ncols: usize,
    #[serde(serialize_with = "ser_bigints")]
    pub invariants: Vec<BigInt>,
}

fn ser_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|b| b.to_string()))
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    /// Invariant factors greater than one.
    pub fn torsion_invariants(&self) -> impl Iterator<Item = &BigInt> {
        self.invariants.iter().filter(|d| !d.is_one())
    }

    pub fn satisfies_divisibility(&self) -> bool {
        self.invariants.windows(2).all(|w| (&w[1] % &w[0]).is_zero())
            && self.invariants.iter().all(|d| d.is_positive())
    }
}

/// Dense decomposition `u * m * v = d` with unimodular `u`, `v`.
#[derive(Clone, Debug)]
pub struct SnfDecomposition {
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub d: Vec<Vec<BigInt>>,
}

impl SnfDecomposition {
    pub fn invariants(&self) -> Vec<BigInt> {
        let k = self.d.len().min(self.d.first().map_or(0, Vec::len));
        (0..k).map(|i| self.d[i][i].clone()).filter(|x| !x.is_zero()).collect()
    }
}

pub fn smith_normal_form(m: &SparseMatrix<BigInt>) -> SnfResult {
    let nrows = m.nrows();
    let ncols = m.ncols();
    let mut rows: Vec<BTreeMap<usize, BigInt>> = vec![BTreeMap::new(); nrows];
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ncols];
    for (j, col) in m.columns().iter().enumerate() {
        for (i, v) in col.iter() {
            rows[*i].insert(j, v.clone());
            col_rows[j].insert(*i);
        }
    }
    let mut live_rows: BTreeSet<usize> = (0..nrows).collect();
    let mut live_cols: BTreeSet<usize> = (0..ncols).collect();
    let mut units = 0usize;

    loop {
        let mut progressed = false;
        let cols: Vec<usize> = live_cols.iter().copied().collect();
        for c in cols {
            if !live_cols.contains(&c) {
                continue;
            }
            let Some(r) = col_rows[c].iter().copied().find(|&r| rows[r][&c].abs().is_one())
            else {
                continue;
            };
            let u = rows[r][&c].clone();
            let pivot_row = rows[r].clone();
            let others: Vec<usize> = col_rows[c].iter().copied().filter(|&i| i != r).collect();
            for i in others {
                let a = rows[i][&c].clone();
                let factor = &a * &u;
                for (j, pv) in &pivot_row {
                    let entry = rows[i].entry(*j).or_insert_with(BigInt::zero);
                    *entry -= &factor * pv;
                    if entry.is_zero() {
                        rows[i].remove(j);
                        col_rows[*j].remove(&i);
                    } else {
                        col_rows[*j].insert(i);
                    }
                }
            }
            // Column operations now clear the pivot row without touching others.
            for j in pivot_row.keys() {
                col_rows[*j].remove(&r);
            }
            rows[r].clear();
            live_rows.remove(&r);
            live_cols.remove(&c);
            units += 1;
            progressed = true;
        }
        if !progressed {
            break;
        }
    }

    let rest_rows: Vec<usize> = live_rows.iter().copied().filter(|&r| !rows[r].is_empty()).collect();
    let rest_cols: Vec<usize> =
        live_cols.iter().copied().filter(|&c| !col_rows[c].is_empty()).collect();
    let col_pos: BTreeMap<usize, usize> =
        rest_cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let dense: Vec<Vec<BigInt>> = rest_rows
        .iter()
        .map(|&r| {
            let mut row = vec![BigInt::zero(); rest_cols.len()];
            for (c, v) in &rows[r] {
                row[col_pos[c]] = v.clone();
            }
            row
        })
        .collect();

    let mut invariants = vec![BigInt::one(); units];
    if !dense.is_empty() && !rest_cols.is_empty() {
        let dec = smith_normal_form_with_transforms(&dense);
        invariants.extend(dec.invariants());
    }
    normalize_chain(&mut invariants);
    let result = SnfResult { nrows, ncols, invariants };
    debug_assert!(result.satisfies_divisibility());
    result
}

/// Repairs the divisibility chain by repeated gcd/lcm exchange.
fn normalize_chain(d: &mut [BigInt]) {
    for x in d.iter_mut() {
        *x = x.abs();
    }
    let n = d.len();
    for i in 0..n {
        for j in i + 1..n {
            if (&d[j] % &d[i]).is_zero() {
                continue;
            }
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
}

/// Dense Smith normal form with tracked unimodular transforms.
///
/// Panics if the reconstruction `u * m * v = d` fails; that would be a bug.
pub fn smith_normal_form_with_transforms(m: &[Vec<BigInt>]) -> SnfDecomposition {
    let nr = m.len();
    let nc = m.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut u = identity(nr);
    let mut v = identity(nc);

    let mut t = 0;
    while t < nr.min(nc) {
        let Some((pi, pj)) = min_abs_entry(&a, t) else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut a, t, pj);
        swap_cols(&mut v, t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..nr {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                row_axpy(&mut a, t, i, &q);
                row_axpy(&mut u, t, i, &q);
                dirty |= !a[i][t].is_zero();
            }
            for j in t + 1..nc {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                col_axpy(&mut a, t, j, &q);
                col_axpy(&mut v, t, j, &q);
                dirty |= !a[t][j].is_zero();
            }
            if dirty {
                // A remainder smaller than the pivot survived; promote it.
                let best_row = (t + 1..nr)
                    .filter(|&i| !a[i][t].is_zero())
                    .min_by_key(|&i| a[i][t].abs());
                let best_col = (t + 1..nc)
                    .filter(|&j| !a[t][j].is_zero())
                    .min_by_key(|&j| a[t][j].abs());
                let row_val = best_row.map(|i| a[i][t].abs());
                let col_val = best_col.map(|j| a[t][j].abs());
                match (row_val, col_val) {
                    (Some(rv), Some(cv)) if cv < rv => {
                        let j = best_col.unwrap();
                        swap_cols(&mut a, t, j);
                        swap_cols(&mut v, t, j);
                    }
                    (Some(_), _) => {
                        let i = best_row.unwrap();
                        a.swap(t, i);
                        u.swap(t, i);
                    }
                    (None, Some(_)) => {
                        let j = best_col.unwrap();
                        swap_cols(&mut a, t, j);
                        swap_cols(&mut v, t, j);
                    }
                    (None, None) => {}
                }
                continue;
            }
            let offender = (t + 1..nr).find(|&i| {
                (t + 1..nc).any(|j| !(&a[i][j] % &a[t][t]).is_zero())
            });
            match offender {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut a, i, t, &minus_one);
                    row_axpy(&mut u, i, t, &minus_one);
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
        t += 1;
    }

    let dec = SnfDecomposition { u, v, d: a };
    assert!(
        matmul(&matmul(&dec.u, m), &dec.v) == dec.d,
        "Smith normal form reconstruction failed"
    );
    dec
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

fn min_abs_entry(a: &[Vec<BigInt>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, x) in row.iter().enumerate().skip(t) {
            if x.is_zero() {
                continue;
            }
            let ax = x.abs();
            if best.as_ref().is_none_or(|(_, _, b)| ax < *b) {
                best = Some((i, j, ax));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

fn swap_cols(a: &mut [Vec<BigInt>], x: usize, y: usize) {
    if x != y {
        for row in a.iter_mut() {
            row.swap(x, y);
        }
    }
}

/// `row[dst] -= q * row[src]`.
fn row_axpy(a: &mut [Vec<BigInt>], src: usize, dst: usize, q: &BigInt) {
    let src_row = a[src].clone();
    for (d, s) in a[dst].iter_mut().zip(&src_row) {
        *d -= q * s;
    }
}

/// `col[dst] -= q * col[src]`.
fn col_axpy(a: &mut [Vec<BigInt>], src: usize, dst: usize, q: &BigInt) {
    for row in a.iter_mut() {
        let s = row[src].clone();
        row[dst] -= q * s;
    }
}

fn matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![BigInt::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    out
}

/// Splits an invariant factor into prime-power orders.
pub fn prime_power_parts(d: &BigInt) -> Vec<u64> {
    let mut n = d.abs().to_u64().expect("torsion coefficient exceeds u64");
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut q = 1;
            while n % p == 0 {
                n /= p;
                q *= p;
            }
            out.push(q);
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::SparseVec;
    use proptest::prelude::*;

    fn z(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn sparse(rows: &[Vec<i64>]) -> SparseMatrix<BigInt> {
        let dense: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| z(x)).collect()).collect();
        SparseMatrix::from_dense(&dense)
    }

    #[test]
    fn two_by_two() {
        let r = smith_normal_form(&sparse(&[vec![1, 2], vec![3, 4]]));
        assert_eq!(r.invariants, vec![z(1), z(2)]);
    }

    #[test]
    fn diagonal_with_zero() {
        let r = smith_normal_form(&sparse(&[vec![2, 0], vec![0, 0]]));
        assert_eq!(r.invariants, vec![z(2)]);
    }

    #[test]
    fn dense_transforms_reconstruct() {
        let m: Vec<Vec<BigInt>> =
            [[4, 6, 8], [6, 9, 12], [2, 10, 4]].iter().map(|r| r.iter().map(|&x| z(x)).collect()).collect();
        let dec = smith_normal_form_with_transforms(&m);
        // gcd of the 2x2 minors (28, 56, 42, 84) is 14
        assert_eq!(dec.invariants(), vec![z(1), z(14)]);
    }

    #[test]
    fn chain_repair() {
        let mut d = vec![z(4), z(6)];
        normalize_chain(&mut d);
        assert_eq!(d, vec![z(2), z(12)]);
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power_parts(&z(12)), vec![4, 3]);
        assert_eq!(prime_power_parts(&z(2)), vec![2]);
    }

    fn det_abs(m: &[Vec<i64>]) -> i128 {
        // Bareiss elimination on a small square integer matrix.
        let n = m.len();
        let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let mut prev = 1i128;
        let mut sign = 1i128;
        for k in 0..n {
            if a[k][k] == 0 {
                let Some(s) = (k + 1..n).find(|&i| a[i][k] != 0) else { return 0 };
                a.swap(k, s);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        (sign * a[n - 1][n - 1]).abs()
    }

    proptest! {
        #[test]
        fn product_of_invariants_is_abs_det(entries in proptest::collection::vec(-6i64..7, 9)) {
            let rows: Vec<Vec<i64>> = entries.chunks(3).map(|c| c.to_vec()).collect();
            let r = smith_normal_form(&sparse(&rows));
            prop_assert!(r.satisfies_divisibility());
            let d = det_abs(&rows);
            if d == 0 {
                prop_assert!(r.rank() < 3);
            } else {
                let prod: BigInt = r.invariants.iter().product();
                prop_assert_eq!(r.rank(), 3);
                prop_assert_eq!(prod, BigInt::from(d));
            }
        }

        #[test]
        fn sparse_and_dense_paths_agree(entries in proptest::collection::vec(-3i64..4, 20)) {
            let rows: Vec<Vec<i64>> = entries.chunks(5).map(|c| c.to_vec()).collect();
            let m = sparse(&rows);
            let dense: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| z(x)).collect()).collect();
            let mut via_dense = smith_normal_form_with_transforms(&dense).invariants();
            normalize_chain(&mut via_dense);
            prop_assert_eq!(smith_normal_form(&m).invariants, via_dense);
        }
    }

    #[test]
    fn empty_matrix() {
        let m = SparseMatrix::<BigInt>::from_columns(3, vec![SparseVec::zero(); 2]);
        assert!(smith_normal_form(&m).invariants.is_empty());
    }
}
