//! The operator `T` and its dual on cochains, with the support audit.
//!
//! Let `G` be the cone homotopy between the inclusion `i` of the far
//! subcomplex and the cover filling `S`, so `∂G + G∂ = i - S`. Put `D = -G`
//! and `T = id + ∂D + D∂`; then `T = S` on the far subcomplex and the dual
//! identity `φ + d(D*φ) = T*φ - D*(dφ)` holds literally. Each side is
//! computed independently (`T*φ = φ∘S`, `D*φ = -φ∘G`, `dφ` by faces), so the
//! identity is a genuine check of the construction.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::chain::{faces, ControlledChainMap, FarSubcomplexSpec, FinSuppChain};
use super::filling::Cover;
use super::homotopy::ChainHomotopy;
use crate::cochains::{distance_to_diagonal, RawCochain, Tuple};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointId, Selection};
use crate::ring::Coeff;
use crate::DIST_TOL;

/// Outcome of one audited claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub pass: bool,
    /// Number of supported tuples examined.
    pub checked: usize,
    pub violations: Vec<Tuple>,
    /// Largest value of the measured bound over the examined tuples.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorAudit {
    pub degree: usize,
    pub generators: usize,
    /// Generators where `φ + dD*φ ≠ T*φ - D*dφ`.
    pub identity_failures: Vec<Tuple>,
    /// `T*φ` is coarse: its support stays within `ρ_n` of the bounded element.
    pub claim_a: ClaimCheck,
    /// `D*` keeps `dφ` coarse, with the bound pushed through `ρ_n`.
    pub claim_b: ClaimCheck,
    /// `‖D*φ‖ ⊆ ‖φ‖ ∪ B` for the bounded set `B` of points within `ρ_{n-1}(0)` of `|φ|`.
    pub claim_c: ClaimCheck,
    /// Radius about the base of the set `B` from claim (c).
    pub claim_c_radius: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct OperatorOutput<F> {
    pub t_phi: RawCochain<F>,
    pub d_phi: RawCochain<F>,
    pub d_dphi: RawCochain<F>,
    pub audit: OperatorAudit,
}

/// `(dφ)(τ) = Σ_i (-1)^i φ(τ without i)`.
fn coboundary_at<F: Coeff>(phi: &RawCochain<F>, t: &[PointId]) -> F {
    faces(t).enumerate().fold(F::zero(), |acc, (i, f)| {
        let v = phi.get(&f);
        if i % 2 == 0 {
            acc.add(&v)
        } else {
            acc.sub(&v)
        }
    })
}

fn eval<F: Coeff>(phi: &RawCochain<F>, c: &FinSuppChain<F>) -> F {
    c.iter().fold(F::zero(), |acc, (t, v)| acc.add(&v.mul(&phi.get(t))))
}

fn eval_coboundary<F: Coeff>(phi: &RawCochain<F>, c: &FinSuppChain<F>) -> F {
    c.iter().fold(F::zero(), |acc, (t, v)| acc.add(&v.mul(&coboundary_at(phi, t))))
}

fn dist_to(space: &FiniteMetricSpace, t: &[PointId], set: &Selection) -> f64 {
    t.iter().map(|&p| space.dist_to_set(p, set)).fold(f64::INFINITY, f64::min)
}

fn reach(space: &FiniteMetricSpace, t: &[PointId], set: &Selection) -> f64 {
    t.iter().map(|&p| space.dist_to_set(p, set)).fold(0.0, f64::max)
}

/// Checks that `s` only uses simplices inside single cover elements, and
/// that no tuple of `|φ|` lies inside an unbounded element.
fn check_adapted<F: Coeff>(phi: &RawCochain<F>, s: &ControlledChainMap<F>, cover: &Cover, top: usize) -> Result<()> {
    let bounded = cover
        .bounded_index()
        .ok_or_else(|| Error::CoverMismatch("cover has no bounded element".into()))?;
    for n in 0..=top {
        for (t, img) in s.images(n) {
            if let Some((bad, _)) = img.iter().find(|(u, _)| !cover.contains_simplex(u)) {
                return Err(Error::CoverMismatch(format!(
                    "S{t:?} uses {bad:?}, which lies in no cover element"
                )));
            }
        }
    }
    for (i, e) in cover.elements().iter().enumerate() {
        if i == bounded {
            continue;
        }
        if let Some(t) = phi.support().find(|t| t.iter().all(|&p| e.contains(p))) {
            return Err(Error::CoverMismatch(format!("cover element {i} contains the supported tuple {t:?}")));
        }
    }
    Ok(())
}

/// Computes `T*φ`, `D*φ` and `D*(dφ)` on the far subcomplex and audits the
/// identity and the three support claims. `g` must be the cone homotopy of
/// `s`, and `cover` must be adapted to `φ`.
pub fn operator_t<F: Coeff>(
    space: &FiniteMetricSpace,
    phi: &RawCochain<F>,
    g: &ChainHomotopy<F>,
    s: &ControlledChainMap<F>,
    cover: &Cover,
    spec: &FarSubcomplexSpec,
) -> Result<OperatorOutput<F>> {
    let n = phi.degree();
    if n == 0 {
        return Err(Error::InvalidParameter("the operator audit needs a cochain of degree >= 1".into()));
    }
    if phi.universe() != space.len() {
        return Err(Error::InvalidParameter("cochain belongs to another space".into()));
    }
    if s.max_dim() < n || g.max_dim() < n {
        return Err(Error::InvalidParameter(format!(
            "S and D must reach degree {n}; they stop at {} and {}",
            s.max_dim(),
            g.max_dim()
        )));
    }
    check_adapted(phi, s, cover, n)?;
    let u = cover.bounded().expect("checked above");
    let base = &spec.base;
    let universe = space.len();
    let minus = F::one().neg();

    let d_phi = RawCochain::from_entries(
        n - 1,
        universe,
        g.images(n - 1).map(|(t, c)| (t.clone(), eval(phi, c).mul(&minus))),
    )?;
    let gens: Vec<&Tuple> = s.domain(n).collect();
    let mut t_entries = Vec::new();
    let mut dd_entries = Vec::new();
    let mut identity_failures = Vec::new();
    for &t in &gens {
        let img = s.image(t).expect("domain tuple");
        let hom = g.get(t).ok_or_else(|| Error::CoverMismatch(format!("{t:?} is outside the homotopy domain")))?;
        let tv = eval(phi, img);
        let ddv = eval_coboundary(phi, hom).mul(&minus);
        let d_dstar = faces(t).enumerate().fold(F::zero(), |acc, (i, f)| {
            let v = d_phi.get(&f);
            if i % 2 == 0 {
                acc.add(&v)
            } else {
                acc.sub(&v)
            }
        });
        if phi.get(t).add(&d_dstar) != tv.sub(&ddv) {
            identity_failures.push(t.clone());
        }
        t_entries.push((t.clone(), tv));
        dd_entries.push((t.clone(), ddv));
    }
    let t_phi = RawCochain::from_entries(n, universe, t_entries)?;
    let d_dphi = RawCochain::from_entries(n, universe, dd_entries)?;

    // (a) a supported σ of T*φ meets N_{ρ_n(diam σ)}(U); equivalently its
    // points lie within R_U + ρ_n + diam σ of the base.
    let r_u = reach(space, u.members(), base);
    let cert = s.certificate(n);
    let mut a = ClaimCheck { claim: "a".into(), pass: true, checked: 0, violations: Vec::new(), bound: 0.0 };
    for (t, _) in t_phi.iter() {
        a.checked += 1;
        let diam = space.diameter_of(t);
        let rho = cert.eval(diam);
        let far = dist_to(space, t, base) + DIST_TOL >= spec.mu(n).eval(diam);
        let bound = r_u + rho + diam;
        a.bound = a.bound.max(bound);
        let near_u = dist_to(space, t, u) <= rho + DIST_TOL;
        if (far && !near_u) || reach(space, t, base) > bound + DIST_TOL {
            a.violations.push(t.clone());
        }
    }
    a.pass = a.violations.is_empty();

    // (b) with β(k) the reach of |dφ| ∩ N_k(Δ), a supported σ of D*dφ at
    // diagonal distance k has reach at most β(k + ρ) + ρ + diam σ.
    let dphi = phi.coboundary();
    let dphi_support: Vec<(f64, f64)> = dphi
        .support()
        .map(|t| (distance_to_diagonal(space, t), reach(space, t, base)))
        .collect();
    let beta = |k: f64| {
        dphi_support
            .iter()
            .filter(|(d, _)| *d <= k + DIST_TOL)
            .map(|(_, r)| *r)
            .fold(0.0, f64::max)
    };
    let mut b = ClaimCheck { claim: "b".into(), pass: true, checked: 0, violations: Vec::new(), bound: 0.0 };
    for (t, _) in d_dphi.iter() {
        b.checked += 1;
        let diam = space.diameter_of(t);
        let rho = cert.eval(diam);
        let k = distance_to_diagonal(space, t);
        let bound = beta(k + rho) + rho + diam;
        b.bound = b.bound.max(bound);
        if reach(space, t, base) > bound + DIST_TOL {
            b.violations.push(t.clone());
        }
    }
    b.pass = b.violations.is_empty();

    // (c) diagonal trace of D*φ
    let rho0 = s.certificate(n - 1).eval(0.0);
    let trace_phi: BTreeSet<PointId> = phi
        .support()
        .filter(|t| t.iter().all(|&p| p == t[0]))
        .map(|t| t[0])
        .collect();
    let delta = |x: PointId| {
        phi.support()
            .map(|t| t.iter().map(|&p| space.dist(x, p)).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    };
    let allowed: Vec<PointId> = (0..universe).filter(|&x| trace_phi.contains(&x) || delta(x) <= rho0 + DIST_TOL).collect();
    let c_radius = reach(space, &allowed, base);
    let mut c = ClaimCheck { claim: "c".into(), pass: true, checked: 0, violations: Vec::new(), bound: c_radius };
    for (t, _) in d_phi.iter().filter(|(t, _)| t.iter().all(|&p| p == t[0])) {
        c.checked += 1;
        if allowed.binary_search(&t[0]).is_err() {
            c.violations.push(t.clone());
        }
    }
    c.pass = c.violations.is_empty();

    let pass = identity_failures.is_empty() && a.pass && b.pass && c.pass;
    Ok(OperatorOutput {
        t_phi,
        d_phi,
        d_dphi,
        audit: OperatorAudit {
            degree: n,
            generators: gens.len(),
            identity_failures,
            claim_a: a,
            claim_b: b,
            claim_c: c,
            claim_c_radius: c_radius,
            pass,
        },
    })
}

/// A cover adapted to `φ`: the bounded element `U = N_margin(‖φ‖ ∪ base)`
/// (index 0), and for every point `x` outside `U` the points closer to `x`
/// than every tuple of `|φ|` (in the sup distance to `(x, ..., x)`), capped
/// at radius `ball_cap`.
pub fn adapted_cover<F: Coeff>(
    space: &FiniteMetricSpace,
    phi: &RawCochain<F>,
    base: &Selection,
    margin: f64,
    ball_cap: f64,
) -> Result<Cover> {
    let trace: Vec<PointId> = phi
        .support()
        .filter(|t| t.iter().all(|&p| p == t[0]))
        .map(|t| t[0])
        .collect();
    let core = base.union(&Selection::new(space.len(), trace)?);
    let u = space.neighborhood(&core, margin)?;
    let mut elements = vec![u.clone()];
    for x in (0..space.len()).filter(|&x| !u.contains(x)) {
        let delta = phi
            .support()
            .map(|t| t.iter().map(|&p| space.dist(x, p)).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        let ball = (0..space.len())
            .filter(|&y| {
                let d = space.dist(x, y);
                d <= ball_cap + DIST_TOL && d < delta - DIST_TOL
            })
            .collect::<Vec<_>>();
        elements.push(Selection::new(space.len(), ball)?);
    }
    Cover::new(space, elements, Some(0))
}

/// A random cochain of the given degree: `terms` tuples with every point in
/// `N_radius(base)`, plus one tuple far from the diagonal. Values are small
/// nonzero integers.
pub fn random_bounded_cochain<F: Coeff>(
    space: &FiniteMetricSpace,
    degree: usize,
    base: &Selection,
    radius: f64,
    terms: usize,
    seed: u64,
) -> Result<RawCochain<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ball = space.neighborhood(base, radius)?;
    if ball.is_empty() {
        return Err(Error::EmptySubset);
    }
    let pick = |rng: &mut ChaCha8Rng| *ball.members().choose(rng).expect("nonempty");
    let value = |rng: &mut ChaCha8Rng| {
        let v = F::from_i64(rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 });
        if v.is_zero() {
            F::one()
        } else {
            v
        }
    };
    let mut entries = Vec::with_capacity(terms + 1);
    for _ in 0..terms {
        let t: Tuple = (0..=degree).map(|_| pick(&mut rng)).collect();
        let v = value(&mut rng);
        entries.push((t, v));
    }
    let x = pick(&mut rng);
    let far = (0..space.len())
        .max_by(|&p, &q| space.dist(x, p).total_cmp(&space.dist(x, q)).then(q.cmp(&p)))
        .expect("nonempty space");
    let mut wide = vec![x; degree + 1];
    wide[degree] = far;
    entries.push((wide, value(&mut rng)));
    RawCochain::from_entries(degree, space.len(), entries)
}
