//! The cone-operator chain homotopy between the inclusion and a controlled
//! chain map.
//!
//! Signs are fixed so that `∂G + G∂ = i - f` holds literally:
//!
//! * `G(x) = -Σ_{y ≠ x} a_y (x, y)` where `f(x) = Σ a_y y`, so that
//!   `∂G(x) = x - f(x)` when `Σ a_y = 1`;
//! * `G(σ) = T_v(c)` with `c = σ - f(σ) - G(∂σ)` and `v` the smallest point
//!   ID in `|c|` (`G(σ) = 0` when `c = 0`). Here `c` is a cycle and
//!   `∂T_v(c) = c - T_v(∂c) = c`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{faces, ChainRecord, ControlledChainMap, FinSuppChain};
use crate::cochains::Tuple;
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointId};
use crate::ring::{Coeff, Ring};
use crate::DIST_TOL;

/// `G` on every generator of the domain of `f`, degree by degree.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainHomotopy<F> {
    images: Vec<BTreeMap<Tuple, FinSuppChain<F>>>,
}

/// Builds the homotopy on the domain of `f` in degrees `0..=max_dim`.
pub fn cone_homotopy_d<F: Coeff>(f: &ControlledChainMap<F>, max_dim: usize) -> Result<ChainHomotopy<F>> {
    if max_dim > f.max_dim() {
        return Err(Error::InvalidParameter(format!(
            "homotopy up to degree {max_dim} needs the map up to that degree, it stops at {}",
            f.max_dim()
        )));
    }
    let mut images: Vec<BTreeMap<Tuple, FinSuppChain<F>>> = Vec::with_capacity(max_dim + 1);
    let level0: Result<BTreeMap<Tuple, FinSuppChain<F>>> = f
        .images(0)
        .map(|(t, img)| {
            let x = t[0];
            if !img.augmentation().is_one() {
                return Err(Error::ChainMapViolation(format!("f({x}) has augmentation != 1")));
            }
            let mut g = FinSuppChain::zero(1);
            for (y, a) in img.iter() {
                if y[0] != x {
                    g.add_term(vec![x, y[0]], &a.neg());
                }
            }
            Ok((t.clone(), g))
        })
        .collect();
    images.push(level0?);
    for n in 1..=max_dim {
        let prev = &images[n - 1];
        let level: Result<BTreeMap<Tuple, FinSuppChain<F>>> = f
            .images(n)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&(t, img)| {
                let mut c = FinSuppChain::simplex(t.clone()).sub(img);
                for (i, face) in faces(t).enumerate() {
                    let g = prev
                        .get(&face)
                        .ok_or_else(|| Error::ChainMapViolation(format!("face {face:?} of {t:?} is outside the domain")))?;
                    let s = if i % 2 == 0 { F::one().neg() } else { F::one() };
                    c.axpy(&s, g);
                }
                let g = match c.vertices().first() {
                    Some(&v) => c.cone(v),
                    None => FinSuppChain::zero(n + 1),
                };
                Ok((t.clone(), g))
            })
            .collect();
        images.push(level?);
    }
    Ok(ChainHomotopy { images })
}

impl<F: Coeff> ChainHomotopy<F> {
    pub fn max_dim(&self) -> usize {
        self.images.len() - 1
    }

    pub fn get(&self, t: &[PointId]) -> Option<&FinSuppChain<F>> {
        self.images.get(t.len().checked_sub(1)?)?.get(t)
    }

    pub fn images(&self, n: usize) -> impl Iterator<Item = (&Tuple, &FinSuppChain<F>)> {
        self.images.get(n).into_iter().flatten()
    }

    /// `G` applied to a chain supported on the domain.
    pub fn apply(&self, c: &FinSuppChain<F>) -> Result<FinSuppChain<F>> {
        let mut out = FinSuppChain::zero(c.degree() + 1);
        for (t, v) in c.iter() {
            let g = self
                .get(t)
                .ok_or_else(|| Error::ChainMapViolation(format!("tuple {t:?} is outside the homotopy domain")))?;
            out.axpy(v, g);
        }
        Ok(out)
    }

    /// Generators where `∂G(σ) + G(∂σ) ≠ σ - f(σ)`.
    pub fn identity_failures(&self, f: &ControlledChainMap<F>) -> Vec<Tuple> {
        (0..=self.max_dim())
            .flat_map(|n| self.images(n).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .par_iter()
            .filter(|(t, g)| {
                let Some(img) = f.image(t) else { return true };
                let mut lhs = g.boundary();
                if t.len() > 1 {
                    match self.apply(&FinSuppChain::simplex(t.to_vec()).boundary()) {
                        Ok(d) => lhs.axpy(&F::one(), &d),
                        Err(_) => return true,
                    }
                }
                lhs != FinSuppChain::simplex(t.to_vec()).sub(img)
            })
            .map(|(t, _)| (*t).clone())
            .collect()
    }

    /// Generators where `|G(σ)|` leaves `N_{ρ_n(diam σ)}(σ)` for the
    /// certificate `ρ_n` of `f`.
    pub fn support_failures(&self, space: &FiniteMetricSpace, f: &ControlledChainMap<F>) -> Vec<Tuple> {
        (0..=self.max_dim())
            .flat_map(|n| self.images(n).map(move |(t, g)| (n, t, g)).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .par_iter()
            .filter(|(n, t, g)| g.displacement(space, t) > f.certificate(*n).eval(space.diameter_of(t)) + DIST_TOL)
            .map(|(_, t, _)| (*t).clone())
            .collect()
    }

    /// Checks both the homotopy identity and the support bound.
    pub fn verify(&self, space: &FiniteMetricSpace, f: &ControlledChainMap<F>) -> Result<()> {
        if let Some(t) = self.identity_failures(f).first() {
            return Err(Error::ChainMapViolation(format!("homotopy identity fails at {t:?}")));
        }
        if let Some(t) = self.support_failures(space, f).first() {
            return Err(Error::ChainMapViolation(format!("homotopy image of {t:?} exceeds the certificate")));
        }
        Ok(())
    }

    pub fn to_record(&self) -> HomotopyRecord {
        HomotopyRecord {
            ring: F::RING,
            images: self
                .images
                .iter()
                .flat_map(|m| m.iter().map(|(t, c)| (t.clone(), c.to_record())))
                .collect(),
        }
    }
}

/// A seeded random controlled chain map `a f_1 + b f_2 + (1 - a - b) f_3`
/// where each `f_i` is induced by a vertex map moving every point at most
/// `max_shift`. Coefficients are small fractions where the ring allows them
/// and integers otherwise.
pub fn random_controlled_map<F: Coeff>(
    space: &FiniteMetricSpace,
    domain: &[Vec<Tuple>],
    max_shift: f64,
    seed: u64,
) -> Result<ControlledChainMap<F>> {
    if !(max_shift >= 0.0) {
        return Err(Error::InvalidParameter(format!("max_shift must be >= 0, got {max_shift}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let balls: Vec<Vec<PointId>> = (0..space.len())
        .map(|x| (0..space.len()).filter(|&y| space.dist(x, y) <= max_shift + DIST_TOL).collect())
        .collect();
    let coeff = |rng: &mut ChaCha8Rng| {
        let p = rng.gen_range(-3i64..=3);
        let q = rng.gen_range(1i64..=4);
        F::from_rational(&BigRational::new(BigInt::from(p), BigInt::from(q))).unwrap_or_else(|| F::from_i64(p))
    };
    let a = coeff(&mut rng);
    let b = coeff(&mut rng);
    let c = F::one().sub(&a).sub(&b);
    let parts: Vec<(F, Vec<PointId>)> = [a, b, c]
        .into_iter()
        .map(|w| (w, balls.iter().map(|ball| ball[rng.gen_range(0..ball.len())]).collect()))
        .collect();
    ControlledChainMap::affine(space, &parts, domain)
}

/// JSON form of a homotopy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyRecord {
    pub ring: Ring,
    pub images: Vec<(Tuple, ChainRecord)>,
}
