//! Vietoris-Rips complexes, boundary matrices and inclusions.

use serde::Serialize;

use crate::cohomology::CoboundaryChain;
use crate::error::{Error, Result};
use crate::linalg::sparse::{SparseMatrix, SparseVec};
use crate::metric::{FiniteMetricSpace, PointId, Selection};
use crate::ring::Coeff;
use crate::DIST_TOL;

/// Default cap on the total number of simplices in one complex.
pub const DEFAULT_SIMPLEX_CAP: usize = 5_000_000;

/// Default Rips scale for a grid of the given spacing.
pub fn default_scale(spacing: f64) -> f64 {
    1.5 * spacing
}

/// A face-closed family of simplices on points of a metric space. Each
/// simplex is an increasing list of point IDs; every dimension is kept in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialComplex {
    scale: f64,
    max_dim: usize,
    parent: u64,
    simplices: Vec<Vec<Vec<PointId>>>,
}

impl SimplicialComplex {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Fingerprint of the space the complex was built on.
    pub fn parent(&self) -> u64 {
        self.parent
    }

    pub fn vertices(&self) -> impl Iterator<Item = PointId> + '_ {
        self.simplices[0].iter().map(|s| s[0])
    }

    pub fn is_empty(&self) -> bool {
        self.simplices[0].is_empty()
    }

    pub fn simplices(&self, dim: usize) -> &[Vec<PointId>] {
        self.simplices.get(dim).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices(dim).len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn index_of(&self, simplex: &[PointId]) -> Option<usize> {
        let dim = simplex.len().checked_sub(1)?;
        self.simplices
            .get(dim)?
            .binary_search_by(|s| s.as_slice().cmp(simplex))
            .ok()
    }

    pub fn contains(&self, simplex: &[PointId]) -> bool {
        self.index_of(simplex).is_some()
    }

    /// Simplicial boundary `∂_dim` with alternating signs: rows are
    /// `(dim-1)`-simplices, columns `dim`-simplices.
    pub fn boundary_matrix<F: Coeff>(&self, dim: usize) -> SparseMatrix<F> {
        assert!(dim >= 1 && dim <= self.max_dim, "boundary dimension {dim} out of range");
        let faces = &self.simplices[dim - 1];
        let cols = self.simplices[dim]
            .iter()
            .map(|s| {
                let mut face = Vec::with_capacity(dim);
                let entries = (0..=dim)
                    .map(|i| {
                        face.clear();
                        face.extend(s.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &v)| v));
                        let row = faces
                            .binary_search_by(|f| f.as_slice().cmp(&face))
                            .expect("complex is face-closed");
                        let sign = if i % 2 == 0 { F::one() } else { F::one().neg() };
                        (row, sign)
                    })
                    .collect();
                SparseVec::from_entries(entries)
            })
            .collect();
        SparseMatrix::from_columns(faces.len(), cols)
    }

    /// `δ^k = ∂_{k+1}^T`.
    pub fn coboundary_matrix<F: Coeff>(&self, k: usize) -> SparseMatrix<F> {
        self.boundary_matrix::<F>(k + 1).transpose()
    }

    /// Simplicial cochain complex in degrees `0..=top_degree + 1`.
    pub fn cochain_complex<F: Coeff>(&self, top_degree: usize, reduced: bool) -> Result<CoboundaryChain<F>> {
        if top_degree + 1 > self.max_dim {
            return Err(Error::InvalidParameter(format!(
                "degree {top_degree} needs simplices of dimension {}, complex stops at {}",
                top_degree + 1,
                self.max_dim
            )));
        }
        if self.is_empty() {
            return Err(Error::EmptyComplex);
        }
        let cells = (0..=top_degree + 1).map(|k| self.count(k)).collect();
        let maps = (0..=top_degree).map(|k| self.coboundary_matrix(k)).collect();
        CoboundaryChain::new(cells, maps, reduced)
    }

    pub fn to_record(&self) -> ComplexRecord {
        ComplexRecord {
            scale: self.scale,
            max_dim: self.max_dim,
            counts: self.counts(),
            simplices: self.simplices.clone(),
        }
    }
}

/// JSON form of a complex.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexRecord {
    pub scale: f64,
    pub max_dim: usize,
    pub counts: Vec<usize>,
    pub simplices: Vec<Vec<Vec<PointId>>>,
}

/// Clique complex of the `scale`-proximity graph on the selected points.
pub fn rips_complex(
    space: &FiniteMetricSpace,
    selection: &Selection,
    scale: f64,
    max_dim: usize,
) -> Result<SimplicialComplex> {
    rips_complex_capped(space, selection, scale, max_dim, DEFAULT_SIMPLEX_CAP)
}

pub fn rips_complex_capped(
    space: &FiniteMetricSpace,
    selection: &Selection,
    scale: f64,
    max_dim: usize,
    cap: usize,
) -> Result<SimplicialComplex> {
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("Rips scale {scale} must be finite and >= 0")));
    }
    if selection.universe() != space.len() {
        return Err(Error::InvalidParameter("selection belongs to another space".into()));
    }
    let pts = selection.members();
    // forward neighbors, sorted, for clique enumeration in lexicographic order
    let forward: Vec<Vec<PointId>> = pts
        .iter()
        .enumerate()
        .map(|(a, &x)| {
            pts[a + 1..]
                .iter()
                .copied()
                .filter(|&y| space.dist(x, y) <= scale + DIST_TOL)
                .collect()
        })
        .collect();
    let local: std::collections::HashMap<PointId, usize> =
        pts.iter().enumerate().map(|(a, &x)| (x, a)).collect();

    let mut simplices: Vec<Vec<Vec<PointId>>> = vec![Vec::new(); max_dim + 1];
    let mut total = 0usize;
    let mut stack: Vec<PointId> = Vec::with_capacity(max_dim + 1);

    fn grow(
        stack: &mut Vec<PointId>,
        candidates: &[PointId],
        forward: &[Vec<PointId>],
        local: &std::collections::HashMap<PointId, usize>,
        simplices: &mut [Vec<Vec<PointId>>],
        total: &mut usize,
        cap: usize,
    ) -> Result<()> {
        for (k, &v) in candidates.iter().enumerate() {
            stack.push(v);
            *total += 1;
            if *total > cap {
                return Err(Error::SizeLimit { what: "simplices", count: *total, cap });
            }
            simplices[stack.len() - 1].push(stack.clone());
            if stack.len() < simplices.len() {
                let fv = &forward[local[&v]];
                let next: Vec<PointId> =
                    candidates[k + 1..].iter().copied().filter(|c| fv.binary_search(c).is_ok()).collect();
                if !next.is_empty() {
                    grow(stack, &next, forward, local, simplices, total, cap)?;
                }
            }
            stack.pop();
        }
        Ok(())
    }

    for (a, &x) in pts.iter().enumerate() {
        stack.push(x);
        total += 1;
        if total > cap {
            return Err(Error::SizeLimit { what: "simplices", count: total, cap });
        }
        simplices[0].push(vec![x]);
        if max_dim > 0 {
            grow(&mut stack, &forward[a], &forward, &local, &mut simplices, &mut total, cap)?;
        }
        stack.pop();
    }
    Ok(SimplicialComplex { scale, max_dim, parent: space.fingerprint(), simplices })
}

/// A validated inclusion `K ⊆ L` of complexes on the same space and scale.
#[derive(Clone, Debug)]
pub struct InclusionMap {
    /// For every dimension, the index in `L` of each simplex of `K`.
    to_target: Vec<Vec<usize>>,
    target_counts: Vec<usize>,
}

impl InclusionMap {
    pub fn new(source: &SimplicialComplex, target: &SimplicialComplex) -> Result<Self> {
        if source.parent != target.parent {
            return Err(Error::NotASubcomplex("complexes live on different spaces".into()));
        }
        if (source.scale - target.scale).abs() > DIST_TOL {
            return Err(Error::ScaleMismatch(source.scale, target.scale));
        }
        if source.max_dim > target.max_dim {
            return Err(Error::NotASubcomplex(format!(
                "source dimension {} exceeds target dimension {}",
                source.max_dim, target.max_dim
            )));
        }
        let mut to_target = Vec::with_capacity(source.max_dim + 1);
        for dim in 0..=source.max_dim {
            let tgt = &target.simplices[dim];
            let mut map = Vec::with_capacity(source.count(dim));
            // both lists are sorted, so a single merge pass suffices
            let mut t = 0;
            for s in &source.simplices[dim] {
                while t < tgt.len() && tgt[t] < *s {
                    t += 1;
                }
                if t == tgt.len() || tgt[t] != *s {
                    return Err(Error::NotASubcomplex(format!("simplex {s:?} missing from target")));
                }
                map.push(t);
            }
            to_target.push(map);
        }
        Ok(Self { to_target, target_counts: target.counts() })
    }

    pub fn is_identity(&self) -> bool {
        self.to_target
            .iter()
            .zip(&self.target_counts)
            .all(|(m, &n)| m.len() == n && m.iter().enumerate().all(|(i, &j)| i == j))
    }

    pub fn simplex_map(&self, dim: usize) -> &[usize] {
        &self.to_target[dim]
    }

    /// Restricts a cochain on the target to the source (coordinate projection).
    pub fn restrict<F: Coeff>(&self, dim: usize, cochain: &SparseVec<F>) -> SparseVec<F> {
        let mut inverse = vec![usize::MAX; self.target_counts[dim]];
        for (s, &t) in self.to_target[dim].iter().enumerate() {
            inverse[t] = s;
        }
        cochain.reindex(|t| (inverse[t] != usize::MAX).then_some(inverse[t]))
    }

    /// Pushes a chain on the source forward into the target.
    pub fn push_forward<F: Coeff>(&self, dim: usize, chain: &SparseVec<F>) -> SparseVec<F> {
        chain.reindex(|s| Some(self.to_target[dim][s]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{generate_grid, SpaceOptions};
    use crate::ring::Gf2;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn square() -> FiniteMetricSpace {
        FiniteMetricSpace::from_points(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn triangle_counts() {
        let t = [vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        let x = FiniteMetricSpace::from_distance_matrix(&t, SpaceOptions::default()).unwrap();
        let k = rips_complex(&x, &x.all_points(), 1.0, 2).unwrap();
        assert_eq!(k.counts(), vec![3, 3, 1]);
        let b = k.boundary_matrix::<BigRational>(2);
        let col: Vec<String> = b.column(0).iter().map(|(_, v)| v.to_string()).collect();
        assert_eq!(col, vec!["1", "-1", "1"]);
        let b2 = k.boundary_matrix::<Gf2>(2);
        assert_eq!(b2.column(0).nnz(), 3);
    }

    #[test]
    fn square_is_a_four_cycle() {
        let x = square();
        let k = rips_complex(&x, &x.all_points(), 1.0, 2).unwrap();
        assert_eq!(k.counts(), vec![4, 4, 0]);
        let v = rips_complex(&x, &x.all_points(), 0.5, 2).unwrap();
        assert_eq!(v.counts(), vec![4, 0, 0]);
    }

    #[test]
    fn boundary_squares_to_zero() {
        let g = generate_grid(2, 2.0, 1.0).unwrap();
        let k = rips_complex(&g, &g.all_points(), 1.5, 3).unwrap();
        for d in 2..=3 {
            assert!(k.boundary_matrix::<BigRational>(d - 1).mul(&k.boundary_matrix(d)).is_zero());
            assert!(k.boundary_matrix::<Gf2>(d - 1).mul(&k.boundary_matrix(d)).is_zero());
        }
    }

    #[test]
    fn king_graph_counts() {
        for l in 1..=4 {
            let g = generate_grid(2, l as f64, 1.0).unwrap();
            let k = rips_complex(&g, &g.all_points(), 1.5, 3).unwrap();
            // independent closed forms for the king graph on an m x m board
            let m = 2 * l + 1;
            let edges = 2 * m * (m - 1) + 2 * (m - 1) * (m - 1);
            let triangles = 4 * (m - 1) * (m - 1);
            let tets = (m - 1) * (m - 1);
            assert_eq!(k.counts(), vec![m * m, edges, triangles, tets]);
        }
    }

    #[test]
    fn inclusion_checks() {
        let g = generate_grid(1, 3.0, 1.0).unwrap();
        let full = rips_complex(&g, &g.all_points(), 1.5, 1).unwrap();
        assert!(InclusionMap::new(&full, &full).unwrap().is_identity());
        let b = Selection::single(g.len(), 3).unwrap();
        let c1 = g.complement_of_neighborhood(&b, 1.0).unwrap();
        let c2 = g.complement_of_neighborhood(&b, 2.0).unwrap();
        let k1 = rips_complex(&g, &c1, 1.5, 1).unwrap();
        let k2 = rips_complex(&g, &c2, 1.5, 1).unwrap();
        assert!(InclusionMap::new(&k2, &k1).is_ok());
        assert!(matches!(InclusionMap::new(&k1, &k2), Err(Error::NotASubcomplex(_))));
        let other = rips_complex(&g, &c2, 1.0, 1).unwrap();
        assert!(matches!(InclusionMap::new(&other, &k1), Err(Error::ScaleMismatch(..))));
    }

    #[test]
    fn restriction_projects_coordinates() {
        let g = generate_grid(1, 2.0, 1.0).unwrap();
        let big = rips_complex(&g, &g.all_points(), 1.5, 1).unwrap();
        let small = rips_complex(&g, &g.selection([3, 4]).unwrap(), 1.5, 1).unwrap();
        let inc = InclusionMap::new(&small, &big).unwrap();
        // indicator of every edge of the big complex
        let all: SparseVec<Gf2> = SparseVec::from_entries((0..big.count(1)).map(|i| (i, Gf2::ONE)).collect());
        assert_eq!(inc.restrict(1, &all).nnz(), 1);
    }

    proptest! {
        #[test]
        fn rips_is_monotone(
            pts in proptest::collection::vec((0.0f64..4.0, 0.0f64..4.0), 3..12),
            e1 in 0.2f64..2.0,
            extra in 0.0f64..1.0,
            drop in 0usize..12,
        ) {
            let x = FiniteMetricSpace::from_points(pts.iter().map(|&(a, b)| vec![a, b]).collect(), None).unwrap();
            let all = x.all_points();
            let k1 = rips_complex(&x, &all, e1, 3).unwrap();
            let k2 = rips_complex(&x, &all, e1 + extra, 3).unwrap();
            for d in 0..=3 {
                for s in k1.simplices(d) {
                    prop_assert!(k2.contains(s));
                }
            }
            let sub = x.selection((0..x.len()).filter(|&i| i != drop % x.len())).unwrap();
            let ks = rips_complex(&x, &sub, e1, 3).unwrap();
            prop_assert!(InclusionMap::new(&ks, &k1).is_ok());
            for d in 1..=3 {
                let dd = k1.boundary_matrix::<BigRational>(d);
                if d > 1 {
                    prop_assert!(k1.boundary_matrix::<BigRational>(d - 1).mul(&dd).is_zero());
                }
            }
        }
    }

    #[test]
    fn size_cap() {
        let g = generate_grid(2, 3.0, 1.0).unwrap();
        assert!(matches!(
            rips_complex_capped(&g, &g.all_points(), 1.5, 3, 100),
            Err(Error::SizeLimit { .. })
        ));
    }
}
