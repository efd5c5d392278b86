//! Finitely supported chains on point tuples, the far subcomplex, and
//! chain maps with a displacement certificate.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cochains::Tuple;
use crate::control::{ControlFunction, ControlFunctions};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointId, Selection};
use crate::ring::{Coeff, Ring};
use crate::DIST_TOL;

/// A finite formal sum of `(n+1)`-tuples of points. Degenerate tuples
/// (repeated points) are ordinary generators.
#[derive(Clone, Debug, PartialEq)]
pub struct FinSuppChain<F> {
    degree: usize,
    terms: BTreeMap<Tuple, F>,
}

impl<F: Coeff> FinSuppChain<F> {
    pub fn zero(degree: usize) -> Self {
        Self { degree, terms: BTreeMap::new() }
    }

    /// The chain `1 · t`.
    pub fn simplex(t: Tuple) -> Self {
        assert!(!t.is_empty(), "a simplex needs at least one point");
        let mut c = Self::zero(t.len() - 1);
        c.terms.insert(t, F::one());
        c
    }

    pub fn from_terms(degree: usize, terms: impl IntoIterator<Item = (Tuple, F)>) -> Result<Self> {
        let mut c = Self::zero(degree);
        for (t, v) in terms {
            if t.len() != degree + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "tuple {t:?} in a degree-{degree} chain"
                )));
            }
            c.add_term(t, &v);
        }
        Ok(c)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, t: &[PointId]) -> F {
        self.terms.get(t).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &F)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, t: Tuple, c: &F) {
        debug_assert_eq!(t.len(), self.degree + 1);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().add(c);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: &F, other: &Self) {
        assert_eq!(self.degree, other.degree, "degree mismatch in chain sum");
        for (t, v) in &other.terms {
            self.add_term(t.clone(), &c.mul(v));
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.axpy(&F::one(), other);
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.axpy(&F::one().neg(), other);
        s
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut s = Self::zero(self.degree);
        s.axpy(c, self);
        s
    }

    /// `∂(x_0..x_n) = Σ_i (-1)^i (x_0..x̂_i..x_n)`. Panics in degree 0.
    pub fn boundary(&self) -> Self {
        assert!(self.degree >= 1, "boundary of a 0-chain");
        let mut out = Self::zero(self.degree - 1);
        for (t, v) in &self.terms {
            for (i, face) in faces(t).enumerate() {
                let c = if i % 2 == 0 { v.clone() } else { v.neg() };
                out.add_term(face, &c);
            }
        }
        out
    }

    /// Sum of coefficients of a 0-chain.
    pub fn augmentation(&self) -> F {
        assert_eq!(self.degree, 0, "augmentation of a positive-degree chain");
        self.terms.values().fold(F::zero(), |a, v| a.add(v))
    }

    /// The cone `T_v`: prepends `v` to every tuple.
    pub fn cone(&self, v: PointId) -> Self {
        let mut out = Self::zero(self.degree + 1);
        for (t, c) in &self.terms {
            let mut s = Vec::with_capacity(t.len() + 1);
            s.push(v);
            s.extend_from_slice(t);
            out.add_term(s, c);
        }
        out
    }

    /// `|c|`: every point occurring in a supported tuple.
    pub fn vertices(&self) -> BTreeSet<PointId> {
        self.terms.keys().flatten().copied().collect()
    }

    /// Largest distance from a point of `|c|` to the nearest point of `sigma`.
    pub fn displacement(&self, space: &FiniteMetricSpace, sigma: &[PointId]) -> f64 {
        self.vertices()
            .into_iter()
            .map(|v| sigma.iter().map(|&s| space.dist(v, s)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    pub fn to_record(&self) -> ChainRecord {
        ChainRecord {
            degree: self.degree,
            ring: F::RING,
            entries: self.terms.iter().map(|(t, v)| (t.clone(), v.to_repr())).collect(),
        }
    }

    pub fn from_record(rec: &ChainRecord) -> Result<Self> {
        if rec.ring != F::RING {
            return Err(Error::RingMismatch { expected: F::RING, found: rec.ring });
        }
        let terms = rec
            .entries
            .iter()
            .map(|(t, s)| {
                F::parse_repr(s)
                    .map(|v| (t.clone(), v))
                    .ok_or_else(|| Error::Parse(format!("bad coefficient `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(rec.degree, terms)
    }
}

/// The faces of a tuple in removal order.
pub fn faces(t: &[PointId]) -> impl Iterator<Item = Tuple> + '_ {
    (0..t.len()).map(move |i| {
        let mut f = Vec::with_capacity(t.len() - 1);
        f.extend(t.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &p)| p));
        f
    })
}

/// `1 · t` for a tuple of arity at least 2, as the boundary of that tuple.
pub fn tuple_boundary<F: Coeff>(t: &[PointId]) -> FinSuppChain<F> {
    FinSuppChain::simplex(t.to_vec()).boundary()
}

/// JSON form of a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub degree: usize,
    pub ring: Ring,
    pub entries: Vec<(Tuple, String)>,
}

/// Every tuple of arity `degree + 1` whose points are pairwise within
/// `width`, optionally restricted to `within`, in lexicographic order.
pub fn tuples_of_width(
    space: &FiniteMetricSpace,
    within: Option<&Selection>,
    width: f64,
    degree: usize,
) -> Vec<Tuple> {
    let pts: Vec<PointId> = match within {
        Some(s) => s.members().to_vec(),
        None => (0..space.len()).collect(),
    };
    let near: Vec<Vec<PointId>> = pts
        .iter()
        .map(|&x| pts.iter().copied().filter(|&y| space.dist(x, y) <= width + DIST_TOL).collect())
        .collect();
    let slot: BTreeMap<PointId, usize> = pts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(degree + 1);
    for &x in &pts {
        cur.push(x);
        extend_tuples(space, &near, &slot, width, degree + 1, &mut cur, &mut |t| {
            out.push(t.to_vec());
        });
        cur.pop();
    }
    out
}

/// Depth-first extension of `cur` by points near all of its members.
fn extend_tuples(
    space: &FiniteMetricSpace,
    near: &[Vec<PointId>],
    slot: &BTreeMap<PointId, usize>,
    width: f64,
    arity: usize,
    cur: &mut Vec<PointId>,
    emit: &mut dyn FnMut(&[PointId]),
) {
    if cur.len() == arity {
        emit(cur);
        return;
    }
    let first = cur[0];
    for &y in &near[slot[&first]] {
        if cur.iter().all(|&p| space.dist(p, y) <= width + DIST_TOL) {
            cur.push(y);
            extend_tuples(space, near, slot, width, arity, cur, emit);
            cur.pop();
        }
    }
}

/// Generators of the far subcomplex: tuples `σ` with `diam σ <= width` and
/// `d(σ, base) >= μ_n(diam σ)`. Both conditions pass to faces when `μ_n` is
/// nondecreasing in `n` and `r`, so the generators span a subcomplex.
#[derive(Clone, Debug)]
pub struct FarSubcomplexSpec {
    pub controls: ControlFunctions,
    pub base: Selection,
    pub width: f64,
    pub max_dim: usize,
}

impl FarSubcomplexSpec {
    pub fn new(controls: ControlFunctions, base: Selection, width: f64, max_dim: usize) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::EmptySubset);
        }
        if !(width >= 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!("width {width} must be finite and >= 0")));
        }
        // piecewise-linear functions compare correctly at the union of their
        // knots plus one point past the last knot
        for n in 1..=max_dim {
            let (lo, hi) = (controls.mu_n(n - 1), controls.mu_n(n));
            let mut at: Vec<f64> = lo.knots().iter().chain(hi.knots()).map(|k| k.0).collect();
            let last = at.iter().copied().fold(0.0, f64::max);
            at.push(2.0 * last + 1.0);
            if at.iter().any(|&r| hi.eval(r) + DIST_TOL < lo.eval(r)) {
                return Err(Error::InvalidControl(format!("mu_{n} drops below mu_{}", n - 1)));
            }
        }
        Ok(Self { controls, base, width, max_dim })
    }

    /// Far subcomplex about the basepoint with one `μ` for all dimensions.
    pub fn at_basepoint(space: &FiniteMetricSpace, mu: ControlFunction, width: f64, max_dim: usize) -> Result<Self> {
        let b = space.require_basepoint()?;
        let rho = ControlFunction::constant(0.0)?;
        Self::new(ControlFunctions::new(mu, rho), Selection::single(space.len(), b)?, width, max_dim)
    }

    pub fn mu(&self, n: usize) -> &ControlFunction {
        self.controls.mu_n(n)
    }

    fn far_enough(&self, space: &FiniteMetricSpace, t: &[PointId], n: usize) -> bool {
        let d = t.iter().map(|&p| space.dist_to_set(p, &self.base)).fold(f64::INFINITY, f64::min);
        d + DIST_TOL >= self.mu(n).eval(space.diameter_of(t))
    }

    pub fn contains(&self, space: &FiniteMetricSpace, t: &[PointId]) -> bool {
        let n = t.len() - 1;
        n <= self.max_dim && space.diameter_of(t) <= self.width + DIST_TOL && self.far_enough(space, t, n)
    }

    /// Generators in degree `n`, lexicographically ordered.
    pub fn generators(&self, space: &FiniteMetricSpace, n: usize) -> Vec<Tuple> {
        let pts: Vec<PointId> = (0..space.len()).collect();
        let near: Vec<Vec<PointId>> = pts
            .iter()
            .map(|&x| pts.iter().copied().filter(|&y| space.dist(x, y) <= self.width + DIST_TOL).collect())
            .collect();
        let slot: BTreeMap<PointId, usize> = pts.iter().map(|&p| (p, p)).collect();
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n + 1);
        for x in 0..space.len() {
            if !self.far_enough(space, &[x], n) {
                continue;
            }
            cur.push(x);
            let mut emit = |t: &[PointId]| {
                if self.far_enough(space, t, n) {
                    out.push(t.to_vec());
                }
            };
            extend_far(self, space, &near, &slot, n + 1, &mut cur, &mut emit);
            cur.pop();
        }
        out
    }

    /// All generators, indexed by degree.
    pub fn domain(&self, space: &FiniteMetricSpace) -> Vec<Vec<Tuple>> {
        (0..=self.max_dim).map(|n| self.generators(space, n)).collect()
    }
}

// Like `extend_tuples`, but prunes prefixes that already fail the far test:
// extending a tuple can only lower d(σ, base) and raise diam σ.
fn extend_far(
    spec: &FarSubcomplexSpec,
    space: &FiniteMetricSpace,
    near: &[Vec<PointId>],
    slot: &BTreeMap<PointId, usize>,
    arity: usize,
    cur: &mut Vec<PointId>,
    emit: &mut dyn FnMut(&[PointId]),
) {
    if cur.len() == arity {
        emit(cur);
        return;
    }
    for &y in &near[slot[&cur[0]]] {
        if cur.iter().all(|&p| space.dist(p, y) <= spec.width + DIST_TOL) {
            cur.push(y);
            if spec.far_enough(space, cur, arity - 1) {
                extend_far(spec, space, near, slot, arity, cur, emit);
            }
            cur.pop();
        }
    }
}

/// A chain map given on a face-closed set of tuples, with a certificate
/// `ρ_n` such that `|f(σ)| ⊆ N_{ρ_n(diam σ)}(σ)` for every generator.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledChainMap<F> {
    images: Vec<BTreeMap<Tuple, FinSuppChain<F>>>,
    certificate: Vec<ControlFunction>,
    supported_by_cover: bool,
}

impl<F: Coeff> ControlledChainMap<F> {
    /// Validates the face closure of the domain, `∂f = f∂`, the augmentation
    /// in degree 0 and the displacement certificate.
    pub fn new(
        space: &FiniteMetricSpace,
        images: Vec<BTreeMap<Tuple, FinSuppChain<F>>>,
        certificate: Vec<ControlFunction>,
    ) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::InvalidParameter("chain map has no degrees".into()));
        }
        if certificate.len() != images.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} certificate functions for {} degrees",
                certificate.len(),
                images.len()
            )));
        }
        let m = Self { images, certificate, supported_by_cover: false };
        m.verify(space)?;
        Ok(m)
    }

    pub(crate) fn flag_cover_support(mut self, flag: bool) -> Self {
        self.supported_by_cover = flag;
        self
    }

    /// The inclusion of the given tuples into all chains.
    pub fn identity(space: &FiniteMetricSpace, domain: &[Vec<Tuple>]) -> Result<Self> {
        Self::from_vertex_map(space, &(0..space.len()).collect::<Vec<_>>(), domain)
    }

    /// The map induced by `g: X -> X` on tuples, `(x_0..x_n) -> (g x_0..g x_n)`.
    pub fn from_vertex_map(space: &FiniteMetricSpace, g: &[PointId], domain: &[Vec<Tuple>]) -> Result<Self> {
        Self::affine(space, &[(F::one(), g.to_vec())], domain)
    }

    /// `Σ a_i (g_i)_*` for vertex maps `g_i` with `Σ a_i = 1`.
    pub fn affine(space: &FiniteMetricSpace, parts: &[(F, Vec<PointId>)], domain: &[Vec<Tuple>]) -> Result<Self> {
        let total = parts.iter().fold(F::zero(), |a, (c, _)| a.add(c));
        if !total.is_one() {
            return Err(Error::ChainMapViolation("coefficients must sum to 1".into()));
        }
        let mut disp: f64 = 0.0;
        for (_, g) in parts {
            if g.len() != space.len() {
                return Err(Error::DimensionMismatch(format!("vertex map has {} entries", g.len())));
            }
            if let Some(&bad) = g.iter().find(|&&y| y >= space.len()) {
                return Err(Error::PointOutOfRange(bad));
            }
            disp = (0..space.len()).map(|x| space.dist(x, g[x])).fold(disp, f64::max);
        }
        let images = domain
            .iter()
            .enumerate()
            .map(|(n, gens)| {
                gens.iter()
                    .map(|t| {
                        let mut c = FinSuppChain::zero(n);
                        for (a, g) in parts {
                            c.add_term(t.iter().map(|&p| g[p]).collect(), a);
                        }
                        (t.clone(), c)
                    })
                    .collect()
            })
            .collect();
        let cert = ControlFunction::constant(disp)?;
        Self::new(space, images, vec![cert; domain.len()])
    }

    pub fn max_dim(&self) -> usize {
        self.images.len() - 1
    }

    pub fn domain(&self, n: usize) -> impl Iterator<Item = &Tuple> {
        self.images.get(n).into_iter().flat_map(|m| m.keys())
    }

    pub fn domain_len(&self, n: usize) -> usize {
        self.images.get(n).map_or(0, BTreeMap::len)
    }

    pub fn image(&self, t: &[PointId]) -> Option<&FinSuppChain<F>> {
        self.images.get(t.len().checked_sub(1)?)?.get(t)
    }

    pub fn images(&self, n: usize) -> impl Iterator<Item = (&Tuple, &FinSuppChain<F>)> {
        self.images.get(n).into_iter().flatten()
    }

    /// `ρ_n`.
    pub fn certificate(&self, n: usize) -> &ControlFunction {
        &self.certificate[n.min(self.certificate.len() - 1)]
    }

    /// Whether every output simplex lies in a single cover element.
    pub fn supported_by_cover(&self) -> bool {
        self.supported_by_cover
    }

    /// Applies the map to a chain supported on the domain.
    pub fn apply(&self, c: &FinSuppChain<F>) -> Result<FinSuppChain<F>> {
        let mut out = FinSuppChain::zero(c.degree());
        for (t, v) in c.iter() {
            let img = self
                .image(t)
                .ok_or_else(|| Error::ChainMapViolation(format!("tuple {t:?} is outside the domain")))?;
            out.axpy(v, img);
        }
        Ok(out)
    }

    pub fn verify(&self, space: &FiniteMetricSpace) -> Result<()> {
        for (n, map) in self.images.iter().enumerate() {
            let cert = &self.certificate[n];
            let bad = map.par_iter().find_map_first(|(t, img)| {
                if t.len() != n + 1 || img.degree() != n {
                    return Some(format!("degree mismatch at {t:?}"));
                }
                let bound = cert.eval(space.diameter_of(t));
                if img.displacement(space, t) > bound + DIST_TOL {
                    return Some(format!("image of {t:?} leaves the {bound}-neighborhood"));
                }
                if n == 0 {
                    return (!img.augmentation().is_one()).then(|| format!("image of {t:?} has augmentation != 1"));
                }
                let mut rhs = FinSuppChain::zero(n - 1);
                for (i, face) in faces(t).enumerate() {
                    let Some(fi) = self.images[n - 1].get(&face) else {
                        return Some(format!("face {face:?} of {t:?} is outside the domain"));
                    };
                    let c = if i % 2 == 0 { F::one() } else { F::one().neg() };
                    rhs.axpy(&c, fi);
                }
                (img.boundary() != rhs).then(|| format!("boundary of f{t:?} differs from f(boundary)"))
            });
            if let Some(msg) = bad {
                return Err(Error::ChainMapViolation(msg));
            }
        }
        Ok(())
    }

    pub fn to_record(&self) -> ChainMapRecord {
        ChainMapRecord {
            ring: F::RING,
            supported_by_cover: self.supported_by_cover,
            certificate: self.certificate.clone(),
            images: self
                .images
                .iter()
                .flat_map(|m| m.iter().map(|(t, c)| (t.clone(), c.to_record())))
                .collect(),
        }
    }
}

/// JSON form of a chain map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainMapRecord {
    pub ring: Ring,
    pub supported_by_cover: bool,
    pub certificate: Vec<ControlFunction>,
    pub images: Vec<(Tuple, ChainRecord)>,
}

/// Monotone certificate from measured `(diam, radius)` samples: knots at the
/// distinct diameters carrying the running maximum.
pub fn certificate_from_samples(mut samples: Vec<(f64, f64)>) -> Result<ControlFunction> {
    if samples.is_empty() {
        return ControlFunction::constant(0.0);
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut knots: Vec<(f64, f64)> = Vec::new();
    let mut best: f64 = 0.0;
    for (d, r) in samples {
        best = best.max(r);
        match knots.last_mut() {
            Some(k) if d - k.0 <= DIST_TOL => k.1 = best,
            _ => knots.push((d, best)),
        }
    }
    ControlFunction::new(knots)
}
