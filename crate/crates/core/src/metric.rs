//! Finite (pseudo)metric spaces, example generators, neighborhoods and the
//! quotient pseudometric `d_A(x, y) = min(d(x, A) + d(y, A), d(x, y))`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::DIST_TOL;

/// Default cap on the number of points a generator may produce.
pub const DEFAULT_POINT_CAP: usize = 20_000;

/// Points are addressed by their index in the space.
pub type PointId = usize;

/// Symmetric-table tolerance used when ingesting distance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A finite point set with a symmetric distance table.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    coords: Option<Vec<Vec<f64>>>,
    dist: Vec<f64>,
    basepoint: Option<PointId>,
    unbounded_model: bool,
    truncation_radius: Option<f64>,
    pseudometric: bool,
}

/// Construction flags for [`FiniteMetricSpace::from_distance_matrix`].
#[derive(Clone, Debug, Default)]
pub struct SpaceOptions {
    /// Reject tables that violate the triangle inequality.
    pub strict_metric: bool,
    pub labels: Option<Vec<String>>,
    pub basepoint: Option<PointId>,
    pub unbounded_model: bool,
    pub truncation_radius: Option<f64>,
}

impl FiniteMetricSpace {
    pub fn from_distance_matrix(table: &[Vec<f64>], opts: SpaceOptions) -> Result<Self> {
        let n = table.len();
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { row: i, len: row.len(), expected: n });
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v = table[i][j];
                if !v.is_finite() {
                    return Err(Error::NonFiniteDistance(i, j));
                }
                if v < 0.0 {
                    return Err(Error::NegativeDistance(i, j));
                }
            }
            if table[i][i].abs() > SYMMETRY_TOL {
                return Err(Error::NonZeroDiagonal(i));
            }
            for j in 0..i {
                if (table[i][j] - table[j][i]).abs() > SYMMETRY_TOL {
                    return Err(Error::AsymmetricInput(j, i));
                }
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // Store the symmetrized value so later lookups agree exactly.
                dist[i * n + j] = if i == j { 0.0 } else { 0.5 * (table[i][j] + table[j][i]) };
            }
        }
        let labels = match opts.labels {
            Some(l) if l.len() == n => l,
            Some(l) => {
                return Err(Error::InvalidParameter(format!(
                    "{} labels for {n} points",
                    l.len()
                )))
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        let space = Self {
            labels,
            coords: None,
            dist,
            basepoint: opts.basepoint,
            unbounded_model: opts.unbounded_model,
            truncation_radius: opts.truncation_radius,
            pseudometric: !opts.strict_metric,
        };
        space.validate_flags()?;
        if opts.strict_metric {
            space.check_triangle()?;
            if let Some((i, j)) = space.zero_distance_pair() {
                return Err(Error::InvalidParameter(format!(
                    "points {i} and {j} are distinct at distance 0"
                )));
            }
        }
        Ok(space)
    }

    /// Euclidean distances between coordinate vectors.
    pub fn from_points(coords: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = coords.len();
        if let Some(d) = coords.first().map(Vec::len) {
            if let Some((i, _)) = coords.iter().enumerate().find(|(_, c)| c.len() != d) {
                return Err(Error::DimensionMismatch(format!(
                    "point {i} has {} coordinates, expected {d}",
                    coords[i].len()
                )));
            }
        }
        if coords.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let d = euclid(&coords[i], &coords[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        if labels.len() != n {
            return Err(Error::InvalidParameter(format!("{} labels for {n} points", labels.len())));
        }
        Ok(Self {
            labels,
            coords: Some(coords),
            dist,
            basepoint: None,
            unbounded_model: false,
            truncation_radius: None,
            pseudometric: false,
        })
    }

    fn validate_flags(&self) -> Result<()> {
        if let Some(b) = self.basepoint {
            if b >= self.len() {
                return Err(Error::PointOutOfRange(b));
            }
        }
        if self.unbounded_model && self.basepoint.is_none() {
            return Err(Error::MissingBasepoint);
        }
        Ok(())
    }

    pub fn with_basepoint(mut self, b: PointId) -> Result<Self> {
        self.basepoint = Some(b);
        self.validate_flags()?;
        Ok(self)
    }

    /// Marks the space as a truncation of an unbounded space.
    pub fn into_unbounded_model(mut self, truncation_radius: f64) -> Result<Self> {
        self.unbounded_model = true;
        self.truncation_radius = Some(truncation_radius);
        self.validate_flags()?;
        Ok(self)
    }

    pub fn into_bounded(mut self) -> Self {
        self.unbounded_model = false;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn dist(&self, x: PointId, y: PointId) -> f64 {
        self.dist[x * self.len() + y]
    }

    pub fn label(&self, x: PointId) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self, x: PointId) -> Option<&[f64]> {
        self.coords.as_ref().map(|c| c[x].as_slice())
    }

    pub fn all_coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn basepoint(&self) -> Option<PointId> {
        self.basepoint
    }

    pub fn require_basepoint(&self) -> Result<PointId> {
        self.basepoint.ok_or(Error::MissingBasepoint)
    }

    pub fn is_unbounded_model(&self) -> bool {
        self.unbounded_model
    }

    pub fn truncation_radius(&self) -> Option<f64> {
        self.truncation_radius
    }

    pub fn is_pseudometric(&self) -> bool {
        self.pseudometric
    }

    pub fn distance_table(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| self.dist[i * n..(i + 1) * n].to_vec()).collect()
    }

    /// Deterministic hash of the distance table, used to tell spaces apart.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the point count and the raw distance bits
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(self.len() as u64);
        for d in &self.dist {
            eat(d.to_bits());
        }
        h
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest positive distance, if any pair is separated.
    pub fn min_positive_distance(&self) -> Option<f64> {
        self.dist.iter().copied().filter(|&d| d > DIST_TOL).min_by(f64::total_cmp)
    }

    /// `d(x, A)`; infinite for empty `A`.
    pub fn dist_to_set(&self, x: PointId, set: &Selection) -> f64 {
        set.iter().map(|a| self.dist(x, a)).fold(f64::INFINITY, f64::min)
    }

    /// Minimum distance between any vertex of `points` and `set`.
    pub fn set_distance(&self, points: &[PointId], set: &Selection) -> f64 {
        points.iter().map(|&p| self.dist_to_set(p, set)).fold(f64::INFINITY, f64::min)
    }

    /// Largest pairwise distance among `points` (0 for fewer than two).
    pub fn diameter_of(&self, points: &[PointId]) -> f64 {
        let mut d: f64 = 0.0;
        for (k, &x) in points.iter().enumerate() {
            for &y in &points[k + 1..] {
                d = d.max(self.dist(x, y));
            }
        }
        d
    }

    /// Distance from the basepoint to the nearest of `points`.
    pub fn dist_from_basepoint(&self, points: &[PointId]) -> Result<f64> {
        let b = self.require_basepoint()?;
        Ok(points.iter().map(|&p| self.dist(b, p)).fold(f64::INFINITY, f64::min))
    }

    pub fn all_points(&self) -> Selection {
        Selection::all(self.len())
    }

    pub fn selection(&self, members: impl IntoIterator<Item = PointId>) -> Result<Selection> {
        Selection::new(self.len(), members)
    }

    /// Closed neighborhood `N_r(A) = {x : d(x, A) <= r}`.
    pub fn neighborhood(&self, set: &Selection, r: f64) -> Result<Selection> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::InvalidParameter(format!("negative radius {r}")));
        }
        self.check_universe(set)?;
        Ok(Selection::from_sorted(
            self.len(),
            (0..self.len()).filter(|&x| self.dist_to_set(x, set) <= r + DIST_TOL).collect(),
        ))
    }

    /// Set difference `X - S`.
    pub fn complement(&self, set: &Selection) -> Result<Selection> {
        self.check_universe(set)?;
        Ok(set.complement())
    }

    /// `X - N_r(A)`, i.e. `{x : d(x, A) > r}`.
    pub fn complement_of_neighborhood(&self, set: &Selection, r: f64) -> Result<Selection> {
        let nbhd = self.neighborhood(set, r)?;
        Ok(nbhd.complement())
    }

    fn check_universe(&self, set: &Selection) -> Result<()> {
        if set.universe() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "selection over {} points used with a space of {}",
                set.universe(),
                self.len()
            )));
        }
        Ok(())
    }

    pub fn check_triangle(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let dij = self.dist(i, j);
                for k in 0..n {
                    if self.dist(i, k) > dij + self.dist(j, k) + DIST_TOL {
                        return Err(Error::TriangleViolation(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    fn zero_distance_pair(&self) -> Option<(PointId, PointId)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..i).map(move |j| (j, i)))
            .find(|&(i, j)| self.dist(i, j) <= DIST_TOL)
    }

    /// Same points with distances replaced by `d_A`.
    pub fn d_a_pseudometric(&self, set: &Selection) -> Result<Self> {
        self.check_universe(set)?;
        if set.is_empty() {
            return Err(Error::EmptySubset);
        }
        let n = self.len();
        let to_a: Vec<f64> = (0..n).map(|x| self.dist_to_set(x, set)).collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dist[i * n + j] = (to_a[i] + to_a[j]).min(self.dist(i, j));
                }
            }
        }
        let out = Self { dist, pseudometric: true, ..self.clone() };
        debug_assert!(out.check_triangle().is_ok());
        Ok(out)
    }

    /// Collapses `A` (and every point at distance 0 from it) to a single
    /// basepoint `[A]` and equips the rest with `d_A`.
    pub fn quotient_by_subset(&self, set: &Selection) -> Result<Quotient> {
        let pseudo = self.d_a_pseudometric(set)?;
        let n = self.len();
        let to_a: Vec<f64> = (0..n).map(|x| self.dist_to_set(x, set)).collect();
        let mut projection = vec![0usize; n];
        let mut representatives = vec![usize::MAX];
        for x in 0..n {
            if to_a[x] <= DIST_TOL {
                projection[x] = 0;
            } else {
                projection[x] = representatives.len();
                representatives.push(x);
            }
        }
        let m = representatives.len();
        let mut dist = vec![0.0; m * m];
        for p in 1..m {
            let x = representatives[p];
            dist[p] = to_a[x];
            dist[p * m] = to_a[x];
            for q in 1..m {
                if p != q {
                    dist[p * m + q] = pseudo.dist(x, representatives[q]);
                }
            }
        }
        let mut labels = vec!["[A]".to_string()];
        labels.extend(representatives[1..].iter().map(|&x| self.labels[x].clone()));
        let truncation_radius = self
            .truncation_radius
            .map(|_| to_a.iter().copied().fold(0.0, f64::max));
        let space = Self {
            labels,
            coords: None,
            dist,
            basepoint: Some(0),
            unbounded_model: self.unbounded_model,
            truncation_radius,
            pseudometric: false,
        };
        space.check_triangle()?;
        if let Some((i, j)) = space.zero_distance_pair() {
            return Err(Error::InvalidParameter(format!(
                "quotient points {i} and {j} remain at distance 0"
            )));
        }
        representatives[0] = set.iter().next().expect("nonempty");
        Ok(Quotient { space, projection, representatives })
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `X / A` with its projection from `X`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub space: FiniteMetricSpace,
    /// Index in the quotient of every original point.
    pub projection: Vec<PointId>,
    /// An original point for every quotient point (`[A]` maps to a member of `A`).
    pub representatives: Vec<PointId>,
}

/// A subset of a finite space, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Selection {
    universe: usize,
    members: Vec<PointId>,
}

impl Selection {
    pub fn new(universe: usize, members: impl IntoIterator<Item = PointId>) -> Result<Self> {
        let mut members: Vec<PointId> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&m| m >= universe) {
            return Err(Error::PointOutOfRange(bad));
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self { universe, members })
    }

    fn from_sorted(universe: usize, members: Vec<PointId>) -> Self {
        Self { universe, members }
    }

    pub fn all(universe: usize) -> Self {
        Self { universe, members: (0..universe).collect() }
    }

    pub fn empty(universe: usize) -> Self {
        Self { universe, members: Vec::new() }
    }

    pub fn single(universe: usize, x: PointId) -> Result<Self> {
        Self::new(universe, [x])
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn members(&self) -> &[PointId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = PointId> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, x: PointId) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.universe];
        for &x in &self.members {
            m[x] = true;
        }
        m
    }

    pub fn complement(&self) -> Self {
        let mask = self.mask();
        Self { universe: self.universe, members: (0..self.universe).filter(|&x| !mask[x]).collect() }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut m = self.members.clone();
        m.extend_from_slice(&other.members);
        m.sort_unstable();
        m.dedup();
        Self { universe: self.universe, members: m }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            universe: self.universe,
            members: self.members.iter().copied().filter(|&x| other.contains(x)).collect(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }
}

fn check_cap(count: usize, cap: usize) -> Result<()> {
    if count > cap {
        return Err(Error::SizeLimit { what: "points", count, cap });
    }
    Ok(())
}

/// Integer lattice sample of `[-L, L]^n` with Euclidean distances.
pub fn generate_grid(dimension: usize, half_extent: f64, spacing: f64) -> Result<FiniteMetricSpace> {
    generate_grid_capped(dimension, half_extent, spacing, DEFAULT_POINT_CAP)
}

pub fn generate_grid_capped(
    dimension: usize,
    half_extent: f64,
    spacing: f64,
    cap: usize,
) -> Result<FiniteMetricSpace> {
    if !(1..=3).contains(&dimension) {
        return Err(Error::InvalidParameter(format!("grid dimension {dimension} not in 1..=3")));
    }
    if !(spacing > 0.0) || !(half_extent >= spacing) {
        return Err(Error::InvalidParameter(format!(
            "need spacing > 0 and half_extent >= spacing, got {spacing}, {half_extent}"
        )));
    }
    let steps = (half_extent / spacing + DIST_TOL).floor() as i64;
    let side = (2 * steps + 1) as usize;
    let count = side.checked_pow(dimension as u32).unwrap_or(usize::MAX);
    check_cap(count, cap)?;

    let mut coords = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    let mut idx = vec![-steps; dimension];
    loop {
        coords.push(idx.iter().map(|&k| k as f64 * spacing).collect::<Vec<f64>>());
        labels.push(format!(
            "({})",
            idx.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
        ));
        // odometer over [-steps, steps]^n, last axis fastest
        let mut axis = dimension;
        loop {
            if axis == 0 {
                let origin = coords.iter().position(|c| c.iter().all(|&x| x == 0.0)).unwrap();
                return FiniteMetricSpace::from_points(coords, Some(labels))?
                    .with_basepoint(origin)?
                    .into_unbounded_model(half_extent);
            }
            axis -= 1;
            if idx[axis] < steps {
                idx[axis] += 1;
                break;
            }
            idx[axis] = -steps;
        }
    }
}

/// Lattice points of spacing `s` with `inner <= |p| <= outer`: a truncated
/// model of the plane minus an open disk. The basepoint is the sample at
/// `(k s, 0)` with `k s` the smallest multiple of `s` that is `>= inner`.
pub fn generate_annulus(inner: f64, outer: f64, spacing: f64) -> Result<FiniteMetricSpace> {
    if !(spacing > 0.0 && inner >= 0.0 && outer >= inner + spacing) {
        return Err(Error::InvalidParameter(format!(
            "need spacing > 0 and 0 <= inner <= outer - spacing, got {inner}, {outer}, {spacing}"
        )));
    }
    let steps = (outer / spacing + DIST_TOL).floor() as i64;
    let side = (2 * steps + 1) as usize;
    check_cap(side * side, DEFAULT_POINT_CAP)?;
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for i in -steps..=steps {
        for j in -steps..=steps {
            let p = [i as f64 * spacing, j as f64 * spacing];
            let r = p[0].hypot(p[1]);
            if r + DIST_TOL >= inner && r <= outer + DIST_TOL {
                coords.push(p.to_vec());
                labels.push(format!("({i},{j})"));
            }
        }
    }
    let k = (inner / spacing - DIST_TOL).ceil() * spacing;
    let base = coords
        .iter()
        .position(|c| (c[0] - k).abs() < DIST_TOL && c[1] == 0.0)
        .expect("axis sample exists");
    FiniteMetricSpace::from_points(coords, Some(labels))?
        .with_basepoint(base)?
        .into_unbounded_model(outer)
}

/// Gap between circle `i` and circle `i + 1` is `i * CIRCLE_GAP_BASE`.
pub const CIRCLE_GAP_BASE: f64 = 4.0;

/// Layout of a generated circle pack.
#[derive(Clone, Debug)]
pub struct CirclePack {
    pub space: FiniteMetricSpace,
    pub circles: Vec<CircleInfo>,
    /// Ray sample points, in order of increasing x.
    pub ray: Vec<PointId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircleInfo {
    /// 1-based circle index; also its radius.
    pub index: usize,
    pub radius: f64,
    pub center: [f64; 2],
    /// Points on the circle, starting with the tangency point on the ray.
    pub members: Vec<PointId>,
}

/// Planar sample of a ray `[0, inf) x {0}` with circles of radius
/// `1, 2, ..., n` resting on it, separated by gaps that grow linearly.
pub fn generate_circle_pack(num_circles: usize, points_per_circle: usize) -> Result<CirclePack> {
    generate_circle_pack_capped(num_circles, points_per_circle, DEFAULT_POINT_CAP)
}

pub fn generate_circle_pack_capped(
    num_circles: usize,
    points_per_circle: usize,
    cap: usize,
) -> Result<CirclePack> {
    if num_circles < 1 {
        return Err(Error::InvalidParameter("need at least one circle".into()));
    }
    if points_per_circle < 8 {
        return Err(Error::InvalidParameter("need at least 8 points per circle".into()));
    }
    // Circle i spans [c_i - i, c_i + i]; the first starts one gap past the origin.
    let mut centers_x = Vec::with_capacity(num_circles);
    let mut left = CIRCLE_GAP_BASE;
    for i in 1..=num_circles {
        let r = i as f64;
        centers_x.push(left + r);
        left += 2.0 * r + r * CIRCLE_GAP_BASE;
    }
    let last = num_circles as f64;
    let ray_end = (centers_x[num_circles - 1] + last + last * CIRCLE_GAP_BASE).ceil() as usize;
    let count = ray_end + 1 + num_circles * (points_per_circle - 1);
    check_cap(count, cap)?;

    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for k in 0..=ray_end {
        coords.push(vec![k as f64, 0.0]);
        labels.push(format!("ray:{k}"));
    }
    let ray: Vec<PointId> = (0..=ray_end).collect();
    let mut circles = Vec::with_capacity(num_circles);
    for (i0, &cx) in centers_x.iter().enumerate() {
        let i = i0 + 1;
        let r = i as f64;
        // the tangency point coincides with the ray sample at x = cx
        let tangent = cx.round() as usize;
        debug_assert!((tangent as f64 - cx).abs() < DIST_TOL);
        let mut members = vec![tangent];
        for k in 1..points_per_circle {
            let theta = -PI / 2.0 + 2.0 * PI * k as f64 / points_per_circle as f64;
            members.push(coords.len());
            coords.push(vec![cx + r * theta.cos(), r + r * theta.sin()]);
            labels.push(format!("c{i}:{k}"));
        }
        circles.push(CircleInfo { index: i, radius: r, center: [cx, r], members });
    }
    let space = FiniteMetricSpace::from_points(coords, Some(labels))?
        .with_basepoint(0)?
        .into_unbounded_model(ray_end as f64)?;
    Ok(CirclePack { space, circles, ray })
}
