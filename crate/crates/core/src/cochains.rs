//! Raw cochains on tuples `X^{n+1}` of a finite space.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::cohomology::{CoboundaryChain, CohomologyGroup};
use crate::error::{Error, Result};
use crate::linalg::bitmat::BitMatrix;
use crate::linalg::sparse::{SparseMatrix, SparseVec};
use crate::metric::{FiniteMetricSpace, PointId};
use crate::ring::{Coeff, Gf2, Ring};
use crate::DIST_TOL;

/// Default cap on `|X|` for the full tuple complex.
pub const FULL_COMPLEX_POINT_CAP: usize = 6;
/// Highest degree the full tuple complex is computed in.
pub const FULL_COMPLEX_MAX_DEGREE: usize = 3;

/// An ordered tuple of points.
pub type Tuple = Vec<PointId>;

/// A function on `(n+1)`-tuples with finite support; absent tuples are 0.
#[derive(Clone, Debug, PartialEq)]
pub struct RawCochain<F> {
    degree: usize,
    universe: usize,
    values: BTreeMap<Tuple, F>,
}

impl<F: Coeff> RawCochain<F> {
    pub fn zero(degree: usize, universe: usize) -> Self {
        Self { degree, universe, values: BTreeMap::new() }
    }

    /// Sums repeated tuples and drops zeros.
    pub fn from_entries(degree: usize, universe: usize, entries: impl IntoIterator<Item = (Tuple, F)>) -> Result<Self> {
        let mut c = Self::zero(degree, universe);
        for (t, v) in entries {
            c.check_tuple(&t)?;
            c.add_at(t, &v);
        }
        Ok(c)
    }

    fn check_tuple(&self, t: &[PointId]) -> Result<()> {
        if t.len() != self.degree + 1 {
            return Err(Error::DimensionMismatch(format!(
                "tuple {t:?} has arity {}, expected {}",
                t.len(),
                self.degree + 1
            )));
        }
        if let Some(&p) = t.iter().find(|&&p| p >= self.universe) {
            return Err(Error::PointOutOfRange(p));
        }
        Ok(())
    }

    fn add_at(&mut self, t: Tuple, v: &F) {
        if v.is_zero() {
            return;
        }
        match self.values.entry(t) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(v);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn ring(&self) -> Ring {
        F::RING
    }

    pub fn get(&self, t: &[PointId]) -> F {
        self.values.get(t).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Support `|φ|` with values, in lexicographic tuple order.
    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &F)> {
        self.values.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Tuple> {
        self.values.keys()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree || self.universe != other.universe {
            return Err(Error::DimensionMismatch(format!(
                "cochains of degree {} on {} points and degree {} on {} points",
                self.degree, self.universe, other.degree, other.universe
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(&F::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(&F::one().neg(), other)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: &F, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (t, v) in &other.values {
            out.add_at(t.clone(), &v.mul(c));
        }
        Ok(out)
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut out = Self::zero(self.degree, self.universe);
        for (t, v) in &self.values {
            out.add_at(t.clone(), &v.mul(c));
        }
        out
    }

    /// `(dφ)(x_0..x_{n+1}) = Σ_i (-1)^i φ(x_0..x̂_i..x_{n+1})`, computed by
    /// spreading each supported tuple to all tuples having it as a face.
    pub fn coboundary(&self) -> Self {
        let n = self.degree;
        let mut out = Self::zero(n + 1, self.universe);
        for (t, v) in &self.values {
            let neg = v.neg();
            for i in 0..=n + 1 {
                let sv = if i % 2 == 0 { v } else { &neg };
                for p in 0..self.universe {
                    let mut s = Vec::with_capacity(n + 2);
                    s.extend_from_slice(&t[..i]);
                    s.push(p);
                    s.extend_from_slice(&t[i..]);
                    out.add_at(s, sv);
                }
            }
        }
        out
    }

    /// Evaluation on a chain given as tuple coefficients.
    pub fn evaluate<'a>(&self, chain: impl IntoIterator<Item = (&'a Tuple, &'a F)>) -> F {
        let mut acc = F::zero();
        for (t, c) in chain {
            if let Some(v) = self.values.get(t) {
                acc.add_assign(&v.mul(c));
            }
        }
        acc
    }
}

/// Sup-metric distance from a tuple to the diagonal: `min_x max_j d(x, σ_j)`.
/// Repeating the last coordinate does not change this value, so tuples of
/// different arity are compared on the same footing.
pub fn distance_to_diagonal(space: &FiniteMetricSpace, t: &[PointId]) -> f64 {
    (0..space.len())
        .map(|x| t.iter().map(|&s| space.dist(x, s)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Largest distance between two coordinates of a tuple.
pub fn spread(space: &FiniteMetricSpace, t: &[PointId]) -> f64 {
    space.diameter_of(t)
}

/// Diagonal trace and near-diagonal support of a cochain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportReport {
    /// `‖φ‖`: points `p` with `(p, ..., p)` in the support.
    pub diag_trace: BTreeSet<PointId>,
    /// For each grid radius, the supported tuples within that distance of the diagonal.
    pub near_diag: Vec<(f64, Vec<Tuple>)>,
}

impl SupportReport {
    pub fn near_diag_vertices(&self, k: usize) -> BTreeSet<PointId> {
        self.near_diag[k].1.iter().flatten().copied().collect()
    }
}

pub fn support_report<F: Coeff>(phi: &RawCochain<F>, space: &FiniteMetricSpace, r_grid: &[f64]) -> SupportReport {
    let diag_trace = phi
        .support()
        .filter(|t| t.iter().all(|&p| p == t[0]))
        .map(|t| t[0])
        .collect();
    let dists: Vec<(&Tuple, f64)> = phi.support().map(|t| (t, distance_to_diagonal(space, t))).collect();
    let near_diag = r_grid
        .iter()
        .map(|&r| (r, dists.iter().filter(|(_, d)| *d <= r + DIST_TOL).map(|(t, _)| (*t).clone()).collect()))
        .collect();
    SupportReport { diag_trace, near_diag }
}

/// `‖φ‖ ⊆ N_bound(b)`.
pub fn is_boundedly_supported<F: Coeff>(phi: &RawCochain<F>, space: &FiniteMetricSpace, bound_radius: f64) -> Result<bool> {
    let b = space.require_basepoint()?;
    let rep = support_report(phi, space, &[]);
    Ok(rep.diag_trace.iter().all(|&p| space.dist(b, p) <= bound_radius + DIST_TOL))
}

/// Tuples of `|φ| ∩ N_r(Δ)` that leave `N_bound(r)(b)`, per grid radius.
pub fn coarse_violations<F: Coeff>(
    phi: &RawCochain<F>,
    space: &FiniteMetricSpace,
    r_grid: &[f64],
    bound: impl Fn(f64) -> f64,
) -> Result<Vec<(f64, Tuple)>> {
    let b = space.require_basepoint()?;
    let rep = support_report(phi, space, r_grid);
    let mut out = Vec::new();
    for (r, tuples) in rep.near_diag {
        let lim = bound(r) + DIST_TOL;
        out.extend(tuples.into_iter().filter(|t| t.iter().any(|&p| space.dist(b, p) > lim)).map(|t| (r, t)));
    }
    Ok(out)
}

/// `|φ| ∩ N_r(Δ) ⊆ N_bound(b)` for every grid radius.
pub fn is_coarse_on_truncation<F: Coeff>(
    phi: &RawCochain<F>,
    space: &FiniteMetricSpace,
    r_grid: &[f64],
    bound_radius: f64,
) -> Result<bool> {
    Ok(coarse_violations(phi, space, r_grid, |_| bound_radius)?.is_empty())
}

/// Index of a tuple in base-`n` order.
fn tuple_index(t: &[PointId], n: usize) -> usize {
    t.iter().fold(0, |acc, &p| acc * n + p)
}

fn tuple_at(mut idx: usize, n: usize, arity: usize) -> Tuple {
    let mut t = vec![0; arity];
    for slot in t.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    t
}

/// Matrix of `d: C^k -> C^{k+1}` on all tuples, both in base-`n` order.
pub fn full_coboundary_matrix<F: Coeff>(n: usize, k: usize) -> SparseMatrix<F> {
    let cols = (0..n.pow(k as u32 + 1))
        .map(|j| {
            let unit = RawCochain::from_entries(k, n, [(tuple_at(j, n, k + 1), F::one())]).expect("valid tuple");
            SparseVec::from_entries(unit.coboundary().iter().map(|(t, v)| (tuple_index(t, n), v.clone())).collect())
        })
        .collect();
    SparseMatrix::from_columns(n.pow(k as u32 + 2), cols)
}

/// Cohomology of the complex of all cochains on `X^{*+1}` in degrees
/// `0..=max_degree`.
pub fn full_complex_cohomology(space: &FiniteMetricSpace, max_degree: usize, ring: Ring) -> Result<Vec<CohomologyGroup>> {
    full_complex_cohomology_capped(space, max_degree, ring, FULL_COMPLEX_POINT_CAP)
}

pub fn full_complex_cohomology_capped(
    space: &FiniteMetricSpace,
    max_degree: usize,
    ring: Ring,
    cap: usize,
) -> Result<Vec<CohomologyGroup>> {
    let n = space.len();
    if n == 0 {
        return Err(Error::EmptyComplex);
    }
    if n > cap {
        return Err(Error::SizeLimit { what: "points", count: n, cap });
    }
    if max_degree > FULL_COMPLEX_MAX_DEGREE {
        return Err(Error::SizeLimit { what: "degree", count: max_degree, cap: FULL_COMPLEX_MAX_DEGREE });
    }
    let cells: Vec<usize> = (0..=max_degree + 1).map(|k| n.pow(k as u32 + 1)).collect();
    match ring {
        Ring::Gf2 => {
            // dense packed rows are the fastest route for these small full matrices
            let ranks: Vec<usize> = (0..=max_degree)
                .map(|k| BitMatrix::from_sparse(&full_coboundary_matrix::<Gf2>(n, k)).rank())
                .collect();
            Ok((0..=max_degree)
                .map(|k| {
                    let below = if k == 0 { 0 } else { ranks[k - 1] };
                    CohomologyGroup::free(k, cells[k] - ranks[k] - below)
                })
                .collect())
        }
        Ring::Rational => {
            let maps = (0..=max_degree).map(|k| full_coboundary_matrix(n, k)).collect();
            let chain = CoboundaryChain::<num_rational::BigRational>::new(cells, maps, false)?;
            crate::cohomology::field_groups(&chain, max_degree)
        }
        Ring::Integer => {
            let maps = (0..=max_degree).map(|k| full_coboundary_matrix(n, k)).collect();
            let chain = CoboundaryChain::<num_bigint::BigInt>::new(cells, maps, false)?;
            crate::cohomology::integer_groups(&chain, max_degree)
        }
    }
}
