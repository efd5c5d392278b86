//! Nondecreasing piecewise-linear control functions `r -> f(r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear interpolation of a knot table. Below the first knot the
/// first value is used; past the last knot the last segment is extended
/// linearly. An optional cap bounds the result from above.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlFunction {
    knots: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cap: Option<f64>,
}

impl ControlFunction {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidControl("no knots".into()));
        }
        for &(r, v) in &knots {
            if !r.is_finite() || !v.is_finite() || r < 0.0 || v < 0.0 {
                return Err(Error::InvalidControl(format!("knot ({r}, {v}) must be finite and >= 0")));
            }
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidControl("knot positions must increase".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidControl("values must be nondecreasing".into()));
            }
        }
        Ok(Self { knots, cap: None })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(vec![(0.0, c)])
    }

    /// `r -> a + b r`.
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        if b < 0.0 {
            return Err(Error::InvalidControl(format!("negative slope {b}")));
        }
        Self::new(vec![(0.0, a), (1.0, a + b)])
    }

    /// Samples `f` at the given knot positions.
    pub fn sampled(f: impl Fn(f64) -> f64, at: &[f64]) -> Result<Self> {
        Self::new(at.iter().map(|&r| (r, f(r))).collect())
    }

    pub fn with_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap >= 0.0) {
            return Err(Error::InvalidControl(format!("cap {cap} must be >= 0")));
        }
        self.cap = Some(cap);
        Ok(self)
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, r: f64) -> f64 {
        let k = &self.knots;
        let v = if k.len() == 1 || r <= k[0].0 {
            k[0].1
        } else {
            let seg = k.windows(2).position(|w| r <= w[1].0).unwrap_or(k.len() - 2);
            let (r0, v0) = k[seg];
            let (r1, v1) = k[seg + 1];
            v0 + (v1 - v0) * (r - r0) / (r1 - r0)
        };
        match self.cap {
            Some(c) => v.min(c),
            None => v,
        }
    }
}

/// The pair `(μ, ρ)` used by far-subcomplex and acyclicity checks, with
/// optional per-dimension refinements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlFunctions {
    pub mu: ControlFunction,
    pub rho: ControlFunction,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_dim: Vec<(ControlFunction, ControlFunction)>,
}

impl ControlFunctions {
    pub fn new(mu: ControlFunction, rho: ControlFunction) -> Self {
        Self { mu, rho, per_dim: Vec::new() }
    }

    pub fn mu_n(&self, n: usize) -> &ControlFunction {
        self.per_dim.get(n).map_or(&self.mu, |p| &p.0)
    }

    pub fn rho_n(&self, n: usize) -> &ControlFunction {
        self.per_dim.get(n).map_or(&self.rho, |p| &p.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_extrapolation() {
        let f = ControlFunction::new(vec![(1.0, 2.0), (3.0, 6.0)]).unwrap();
        assert_eq!(f.eval(0.0), 2.0);
        assert_eq!(f.eval(2.0), 4.0);
        assert_eq!(f.eval(5.0), 10.0);
        assert_eq!(f.clone().with_cap(7.0).unwrap().eval(5.0), 7.0);
        let a = ControlFunction::affine(2.0, 1.0).unwrap();
        assert_eq!(a.eval(10.0), 12.0);
    }

    #[test]
    fn rejects_decreasing() {
        assert!(ControlFunction::new(vec![(0.0, 2.0), (1.0, 1.0)]).is_err());
        assert!(ControlFunction::new(vec![(1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(ControlFunction::new(vec![]).is_err());
        assert!(ControlFunction::affine(0.0, -1.0).is_err());
    }
}
