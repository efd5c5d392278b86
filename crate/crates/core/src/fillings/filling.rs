//! Controlled fillings: the chain map `M` from the far subcomplex into Rips
//! chains, and its cover-constrained variant `S`.
//!
//! Vertices map to themselves. An edge `(x, y)` maps to a shortest path from
//! `x` to `y` in the Rips graph of a neighborhood of `{x, y}`; a higher tuple
//! `σ` maps to a solution of `∂c = M(∂σ)` among the Rips simplices of a
//! neighborhood of `σ`. Neighborhood radii start at `diam σ` and grow by
//! [`FILL_GROWTH`] up to a cap; the radius that succeeded is recorded and the
//! certificate `ρ_n` is the running maximum of those radii.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{certificate_from_samples, faces, ControlledChainMap, FarSubcomplexSpec, FinSuppChain};
use crate::cochains::Tuple;
use crate::error::{Error, Result};
use crate::linalg::reduce::solve_in_subspace;
use crate::linalg::sparse::SparseVec;
use crate::metric::{FiniteMetricSpace, PointId, Selection};
use crate::ring::Field;
use crate::simplicial::rips_complex;
use crate::DIST_TOL;

/// Growth factor between successive neighborhood radii.
pub const FILL_GROWTH: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillingOptions {
    /// Rips scale of the target chains.
    pub scale: f64,
    /// Largest neighborhood radius tried.
    pub cap: f64,
    /// Record failures and keep going instead of stopping at the first one.
    pub audit: bool,
}

impl FillingOptions {
    pub fn new(scale: f64, cap: f64) -> Self {
        Self { scale, cap, audit: false }
    }

    fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale {} must be positive", self.scale)));
        }
        if !(self.cap >= 0.0) {
            return Err(Error::InvalidParameter(format!("cap {} must be >= 0", self.cap)));
        }
        Ok(())
    }

    /// Radii tried for a tuple of the given diameter.
    pub fn radii(&self, diam: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut r = diam;
        while r <= self.cap + DIST_TOL {
            out.push(r);
            r = if r == 0.0 { self.scale } else { r * FILL_GROWTH };
        }
        if out.last().is_some_and(|&l| l < self.cap - DIST_TOL) {
            out.push(self.cap);
        }
        out
    }
}

/// A family of point sets covering the space, one of which may be marked as
/// the bounded element.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    elements: Vec<Selection>,
    bounded: Option<usize>,
    // for each point, the elements containing it
    owners: Vec<Vec<usize>>,
}

impl Cover {
    pub fn new(space: &FiniteMetricSpace, elements: Vec<Selection>, bounded: Option<usize>) -> Result<Self> {
        if elements.iter().any(|e| e.universe() != space.len()) {
            return Err(Error::CoverMismatch("cover element belongs to another space".into()));
        }
        if let Some(b) = bounded {
            if b >= elements.len() {
                return Err(Error::CoverMismatch(format!("bounded element {b} does not exist")));
            }
        }
        let mut owners = vec![Vec::new(); space.len()];
        for (i, e) in elements.iter().enumerate() {
            for x in e.iter() {
                owners[x].push(i);
            }
        }
        if let Some(x) = owners.iter().position(Vec::is_empty) {
            return Err(Error::CoverMismatch(format!("point {x} is not covered")));
        }
        Ok(Self { elements, bounded, owners })
    }

    /// The cover by closed balls of radius `r` about every point.
    pub fn balls(space: &FiniteMetricSpace, r: f64) -> Result<Self> {
        let elements = (0..space.len())
            .map(|x| space.neighborhood(&Selection::single(space.len(), x)?, r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, elements, None)
    }

    pub fn whole(space: &FiniteMetricSpace) -> Result<Self> {
        Self::new(space, vec![Selection::all(space.len())], Some(0))
    }

    pub fn elements(&self) -> &[Selection] {
        &self.elements
    }

    pub fn bounded(&self) -> Option<&Selection> {
        self.bounded.map(|b| &self.elements[b])
    }

    pub fn bounded_index(&self) -> Option<usize> {
        self.bounded
    }

    /// An element containing every point of `s`, lowest index first.
    pub fn element_containing(&self, s: &[PointId]) -> Option<usize> {
        let (&first, rest) = s.split_first()?;
        self.owners[first]
            .iter()
            .copied()
            .find(|&i| rest.iter().all(|&p| self.elements[i].contains(p)))
    }

    pub fn contains_simplex(&self, s: &[PointId]) -> bool {
        self.element_containing(s).is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCause {
    /// No filling exists in any neighborhood up to the cap.
    NoFilling,
    /// A face could not be filled, so the tuple was not attempted.
    FaceFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillingFailure {
    pub simplex: Tuple,
    pub cap: f64,
    pub cause: FailureCause,
}

#[derive(Clone, Debug)]
pub struct FillingResult<F> {
    pub map: ControlledChainMap<F>,
    /// Failures in audit mode; always empty otherwise.
    pub failures: Vec<FillingFailure>,
    /// Largest radius that was needed, per degree.
    pub realized_radius: Vec<f64>,
}

/// `M` on the generators of the far subcomplex.
pub fn filling_map_m<F: Field>(
    space: &FiniteMetricSpace,
    spec: &FarSubcomplexSpec,
    opts: &FillingOptions,
) -> Result<FillingResult<F>> {
    fill_domain(space, spec.domain(space), None, opts)
}

/// `S`: like [`filling_map_m`], but every output simplex lies in a single
/// element of `cover`.
pub fn cover_filling_s<F: Field>(
    space: &FiniteMetricSpace,
    spec: &FarSubcomplexSpec,
    cover: &Cover,
    opts: &FillingOptions,
) -> Result<FillingResult<F>> {
    fill_domain(space, spec.domain(space), Some(cover), opts)
}

/// All faces of the given tuples, indexed by degree.
pub fn face_closure(seeds: &[Tuple]) -> Vec<Vec<Tuple>> {
    let top = seeds.iter().map(|t| t.len()).max().unwrap_or(1) - 1;
    let mut levels: Vec<std::collections::BTreeSet<Tuple>> = vec![Default::default(); top + 1];
    for t in seeds {
        levels[t.len() - 1].insert(t.clone());
    }
    for n in (1..=top).rev() {
        let lower: Vec<Tuple> = levels[n].iter().flat_map(|t| faces(t).collect::<Vec<_>>()).collect();
        levels[n - 1].extend(lower);
    }
    levels.into_iter().map(|l| l.into_iter().collect()).collect()
}

/// Fills an explicit face-closed domain.
pub fn fill_domain<F: Field>(
    space: &FiniteMetricSpace,
    domain: Vec<Vec<Tuple>>,
    cover: Option<&Cover>,
    opts: &FillingOptions,
) -> Result<FillingResult<F>> {
    opts.validate()?;
    if domain.is_empty() {
        return Err(Error::InvalidParameter("empty filling domain".into()));
    }
    let mut images: Vec<BTreeMap<Tuple, FinSuppChain<F>>> = Vec::with_capacity(domain.len());
    images.push(domain[0].iter().map(|t| (t.clone(), FinSuppChain::simplex(t.clone()))).collect());
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut certificate = vec![certificate_from_samples(vec![(0.0, 0.0)])?];
    let mut realized = vec![0.0];
    let mut failures = Vec::new();
    for n in 1..domain.len() {
        let prev = &images[n - 1];
        let outcomes: Vec<Result<Outcome<F>>> = domain[n]
            .par_iter()
            .map(|t| fill_one(space, t, prev, cover, opts))
            .collect();
        let mut level = BTreeMap::new();
        let mut best: f64 = 0.0;
        for (t, o) in domain[n].iter().zip(outcomes) {
            match o? {
                Outcome::Filled(c, r) => {
                    samples.push((space.diameter_of(t), r));
                    best = best.max(r);
                    level.insert(t.clone(), c);
                }
                Outcome::Failed(cause) => {
                    if !opts.audit {
                        return Err(Error::FillingNotFound { simplex: t.clone(), cap: opts.cap });
                    }
                    failures.push(FillingFailure { simplex: t.clone(), cap: opts.cap, cause });
                }
            }
        }
        images.push(level);
        certificate.push(certificate_from_samples(samples.clone())?);
        realized.push(best);
    }
    let map = ControlledChainMap::new(space, images, certificate)?.flag_cover_support(cover.is_some());
    Ok(FillingResult { map, failures, realized_radius: realized })
}

enum Outcome<F> {
    Filled(FinSuppChain<F>, f64),
    Failed(FailureCause),
}

fn fill_one<F: Field>(
    space: &FiniteMetricSpace,
    t: &[PointId],
    prev: &BTreeMap<Tuple, FinSuppChain<F>>,
    cover: Option<&Cover>,
    opts: &FillingOptions,
) -> Result<Outcome<F>> {
    let n = t.len() - 1;
    let mut rhs = FinSuppChain::zero(n - 1);
    for (i, face) in faces(t).enumerate() {
        let Some(img) = prev.get(&face) else {
            return Ok(Outcome::Failed(FailureCause::FaceFailed));
        };
        let c = if i % 2 == 0 { F::one() } else { F::one().neg() };
        rhs.axpy(&c, img);
    }
    if rhs.is_zero() {
        return Ok(Outcome::Filled(FinSuppChain::zero(n), 0.0));
    }
    let verts = Selection::new(space.len(), t.iter().copied())?;
    for r in opts.radii(space.diameter_of(t)) {
        let nb = space.neighborhood(&verts, r)?;
        let found = if n == 1 {
            shortest_path(space, &nb, t[0], t[1], opts.scale, cover).map(|p| path_chain(&p))
        } else {
            solve_filling(space, &nb, &rhs, opts.scale, cover)?
        };
        if let Some(c) = found {
            return Ok(Outcome::Filled(c, r));
        }
    }
    Ok(Outcome::Failed(FailureCause::NoFilling))
}

/// Shortest path in the Rips graph on `within`, by total length. Ties go to
/// the lower point ID, so the result is reproducible.
fn shortest_path(
    space: &FiniteMetricSpace,
    within: &Selection,
    from: PointId,
    to: PointId,
    scale: f64,
    cover: Option<&Cover>,
) -> Option<Vec<PointId>> {
    let pts = within.members();
    let slot = |p: PointId| pts.binary_search(&p).ok();
    let (s, e) = (slot(from)?, slot(to)?);
    let m = pts.len();
    let mut dist = vec![f64::INFINITY; m];
    let mut prev = vec![usize::MAX; m];
    let mut done = vec![false; m];
    dist[s] = 0.0;
    loop {
        let mut u = usize::MAX;
        for i in 0..m {
            if !done[i] && dist[i].is_finite() && (u == usize::MAX || dist[i] < dist[u]) {
                u = i;
            }
        }
        if u == usize::MAX {
            return None;
        }
        if u == e {
            break;
        }
        done[u] = true;
        for v in 0..m {
            if done[v] || v == u {
                continue;
            }
            let d = space.dist(pts[u], pts[v]);
            if d > scale + DIST_TOL {
                continue;
            }
            if let Some(c) = cover {
                if !c.contains_simplex(&[pts[u], pts[v]]) {
                    continue;
                }
            }
            if dist[u] + d < dist[v] - DIST_TOL {
                dist[v] = dist[u] + d;
                prev[v] = u;
            }
        }
    }
    let mut path = vec![pts[e]];
    let mut cur = e;
    while cur != s {
        cur = prev[cur];
        path.push(pts[cur]);
    }
    path.reverse();
    Some(path)
}

/// The 1-chain of a vertex path, each edge written in increasing order.
fn path_chain<F: Field>(path: &[PointId]) -> FinSuppChain<F> {
    let mut c = FinSuppChain::zero(1);
    for w in path.windows(2) {
        if w[0] < w[1] {
            c.add_term(vec![w[0], w[1]], &F::one());
        } else {
            c.add_term(vec![w[1], w[0]], &F::one().neg());
        }
    }
    c
}

/// Solves `∂c = rhs` among the Rips simplices on `within` (those inside a
/// single cover element, if a cover is given).
fn solve_filling<F: Field>(
    space: &FiniteMetricSpace,
    within: &Selection,
    rhs: &FinSuppChain<F>,
    scale: f64,
    cover: Option<&Cover>,
) -> Result<Option<FinSuppChain<F>>> {
    let n = rhs.degree() + 1;
    let k = rips_complex(space, within, scale, n)?;
    let mut z = Vec::with_capacity(rhs.nnz());
    for (t, v) in rhs.iter() {
        match k.index_of(t) {
            Some(i) => z.push((i, v.clone())),
            None => return Ok(None),
        }
    }
    let top = k.simplices(n);
    if top.is_empty() {
        return Ok(None);
    }
    let mask: Vec<bool> = match cover {
        Some(c) => top.iter().map(|s| c.contains_simplex(s)).collect(),
        None => vec![true; top.len()],
    };
    let x = solve_in_subspace(&k.boundary_matrix::<F>(n), &SparseVec::from_entries(z), &mask)?;
    Ok(x.map(|x| {
        let mut c = FinSuppChain::zero(n);
        for (j, v) in x.iter() {
            c.add_term(top[*j].clone(), v);
        }
        c
    }))
}
