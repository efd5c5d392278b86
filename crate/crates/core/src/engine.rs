//! High-level drivers: coarse cohomology from complement towers, the
//! complement variant about a subset, the `d_A` quotient cross-check, and
//! the acyclicity-at-infinity checker.

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cochains::full_complex_cohomology;
use crate::cohomology::CohomologyGroup;
use crate::control::ControlFunctions;
use crate::error::{Error, Result};
use crate::linalg::reduce::{rank_kernel_image, ColumnReduction, PivotBasis};
use crate::linalg::sparse::{SparseMatrix, SparseVec};
use crate::metric::{FiniteMetricSpace, PointId, Selection};
use crate::ring::{Field, Gf2, Ring};
use crate::simplicial::{rips_complex, InclusionMap, SimplicialComplex};
use crate::towers::{
    build_complement_tower, colimit_analysis, default_r_grid, ColimitReport, Tower, TowerParams, Verdict,
    DEFAULT_STABILITY, DEFAULT_WINDOW,
};
use crate::DIST_TOL;

/// Caveat attached to every coarse profile.
pub const CONTRACTIBILITY_CAVEAT: &str = "the tower formula assumes the space is uniformly contractible at \
infinity; only the homological surrogate (acyclicity) can be checked on samples";

/// Label of the acyclicity checker.
pub const ACYCLICITY_LABEL: &str = "necessary-condition check";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseParams {
    /// Rips scale; defaults to 1.5 times the smallest positive distance.
    pub scale: Option<f64>,
    /// Tower radii; defaults to [`default_r_grid`].
    pub r_grid: Option<Vec<f64>>,
    /// Highest coarse degree reported.
    pub max_degree: usize,
    pub ring: Ring,
    pub window: usize,
    pub stability: usize,
}

impl Default for CoarseParams {
    fn default() -> Self {
        Self {
            scale: None,
            r_grid: None,
            max_degree: 3,
            ring: Ring::Rational,
            window: DEFAULT_WINDOW,
            stability: DEFAULT_STABILITY,
        }
    }
}

impl CoarseParams {
    pub fn resolve_scale(&self, space: &FiniteMetricSpace) -> Result<f64> {
        match self.scale {
            Some(s) if s > 0.0 && s.is_finite() => Ok(s),
            Some(s) => Err(Error::InvalidParameter(format!("scale {s} must be positive"))),
            None => space
                .min_positive_distance()
                .map(|d| 1.5 * d)
                .ok_or_else(|| Error::InvalidParameter("space has no positive distance to derive a scale".into())),
        }
    }

    fn resolve_grid(&self, space: &FiniteMetricSpace, base: &Selection, scale: f64) -> Result<Vec<f64>> {
        match &self.r_grid {
            Some(g) => Ok(g.clone()),
            None => default_r_grid(space, base, scale),
        }
    }

    fn tower_params(&self, r_grid: Vec<f64>, scale: f64) -> Result<TowerParams> {
        if self.max_degree == 0 {
            return Err(Error::InvalidParameter("max degree must be at least 1".into()));
        }
        Ok(TowerParams { r_grid, scale, max_degree: self.max_degree - 1, ring: self.ring })
    }
}

/// One degree of a coarse profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseDegree {
    pub degree: usize,
    #[serde(flatten)]
    pub verdict: Verdict,
    /// Persistent ranks of the tower in degree `degree - 1` (empty in degree 0).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub persistent_ranks: Vec<usize>,
    /// Exact group, when computed from the full complex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<CohomologyGroup>,
}

impl CoarseDegree {
    pub fn rank(&self) -> Option<usize> {
        self.verdict.stabilized_rank()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseProfile {
    pub bounded: bool,
    pub degrees: Vec<CoarseDegree>,
    pub scale: Option<f64>,
    pub truncation_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colimit: Option<ColimitReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<Tower>,
    pub caveat: String,
}

impl CoarseProfile {
    pub fn ranks(&self) -> Vec<Option<usize>> {
        self.degrees.iter().map(CoarseDegree::rank).collect()
    }
}

fn shifted_profile(space: &FiniteMetricSpace, tower: Tower, params: &CoarseParams) -> Result<CoarseProfile> {
    let colimit = colimit_analysis(&tower, params.window, params.stability)?;
    let mut degrees = vec![CoarseDegree {
        degree: 0,
        verdict: Verdict::Stabilized { rank: 0 },
        persistent_ranks: Vec::new(),
        group: None,
    }];
    degrees.extend(colimit.degrees.iter().map(|d| CoarseDegree {
        degree: d.degree + 1,
        verdict: d.verdict.clone(),
        persistent_ranks: d.persistent_ranks.clone(),
        group: None,
    }));
    Ok(CoarseProfile {
        bounded: false,
        degrees,
        scale: Some(tower.params.scale),
        truncation_radius: space.truncation_radius(),
        colimit: Some(colimit),
        tower: Some(tower),
        caveat: CONTRACTIBILITY_CAVEAT.to_string(),
    })
}

/// Coarse cohomology in degrees `0..=max_degree`. Unbounded models use the
/// complement tower about the basepoint, shifted up one degree; spaces flagged
/// bounded use the full tuple complex directly.
pub fn coarse_cohomology(space: &FiniteMetricSpace, params: &CoarseParams) -> Result<CoarseProfile> {
    if !space.is_unbounded_model() {
        let top = params.max_degree.min(crate::cochains::FULL_COMPLEX_MAX_DEGREE);
        let groups = full_complex_cohomology(space, top, params.ring)?;
        return Ok(CoarseProfile {
            bounded: true,
            degrees: groups
                .into_iter()
                .map(|g| CoarseDegree {
                    degree: g.degree,
                    verdict: Verdict::Stabilized { rank: g.free_rank },
                    persistent_ranks: Vec::new(),
                    group: Some(g),
                })
                .collect(),
            scale: None,
            truncation_radius: space.truncation_radius(),
            colimit: None,
            tower: None,
            caveat: CONTRACTIBILITY_CAVEAT.to_string(),
        });
    }
    let b = space.require_basepoint()?;
    let base = Selection::single(space.len(), b)?;
    let scale = params.resolve_scale(space)?;
    let grid = params.resolve_grid(space, &base, scale)?;
    let tower = build_complement_tower(space, &base, &params.tower_params(grid, scale)?)?;
    shifted_profile(space, tower, params)
}

/// Coarse cohomology of `X - A` from the tower `r -> X - N_r(A)`.
pub fn coarse_cohomology_of_complement(
    space: &FiniteMetricSpace,
    subset: &Selection,
    params: &CoarseParams,
) -> Result<CoarseProfile> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let scale = params.resolve_scale(space)?;
    let grid = params.resolve_grid(space, subset, scale)?;
    for &r in &grid {
        if space.complement_of_neighborhood(subset, r)?.is_empty() {
            return Err(Error::ComplementExhausted { radius: r });
        }
    }
    let tower = build_complement_tower(space, subset, &params.tower_params(grid, scale)?)?;
    shifted_profile(space, tower, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DaStage {
    pub radius: f64,
    pub betti_original: Vec<usize>,
    pub betti_quotient: Vec<usize>,
    /// Whether the two complexes coincide after projection (only required for `r > 2ε`).
    pub complexes_identical: bool,
    /// Whether this stage counts toward the verdict.
    pub compared: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DaReport {
    pub pass: bool,
    pub scale: f64,
    pub quotient_points: usize,
    pub stages: Vec<DaStage>,
    pub persistent_ranks_equal: bool,
    pub original: Tower,
    pub quotient: Tower,
}

/// Builds the tower about `A` on `(X, d)` and about `[A]` on `(X/Ā, d_A)` and
/// compares them stage by stage. Stages with `r > 2ε` must have identical
/// complexes (after projection), Betti numbers and persistent ranks.
pub fn consistency_check_da(space: &FiniteMetricSpace, subset: &Selection, params: &CoarseParams) -> Result<DaReport> {
    let scale = params.resolve_scale(space)?;
    let grid = params.resolve_grid(space, subset, scale)?;
    let tp = params.tower_params(grid, scale)?;
    let quotient = space.quotient_by_subset(subset)?;
    let qbase = Selection::single(quotient.space.len(), 0)?;
    let orig = build_complement_tower(space, subset, &tp)?;
    let quot = build_complement_tower(&quotient.space, &qbase, &tp)?;

    let n = orig.len().min(quot.len());
    let mut stages = Vec::with_capacity(n);
    let mut pass = orig.len() == quot.len();
    for i in 0..n {
        let r = orig.stages[i].radius;
        let compared = r > 2.0 * scale + DIST_TOL;
        let ko = rips_complex(space, &space.complement_of_neighborhood(subset, r)?, scale, tp.max_degree + 1)?;
        let kq = rips_complex(
            &quotient.space,
            &quotient.space.complement_of_neighborhood(&qbase, r)?,
            scale,
            tp.max_degree + 1,
        )?;
        let identical = same_after_projection(&ko, &kq, &quotient.projection);
        let bo: Vec<usize> = orig.stages[i].groups.iter().map(|g| g.free_rank).collect();
        let bq: Vec<usize> = quot.stages[i].groups.iter().map(|g| g.free_rank).collect();
        if compared && (!identical || bo != bq) {
            pass = false;
        }
        stages.push(DaStage { radius: r, betti_original: bo, betti_quotient: bq, complexes_identical: identical, compared });
    }
    let first = stages.iter().position(|s| s.compared).unwrap_or(n);
    let mut ranks_equal = true;
    for d in 0..=tp.max_degree {
        for i in first..n {
            for j in i..n {
                ranks_equal &= orig.persistent_rank(d, i, j) == quot.persistent_rank(d, i, j);
            }
        }
    }
    pass &= ranks_equal;
    Ok(DaReport {
        pass,
        scale,
        quotient_points: quotient.space.len(),
        stages,
        persistent_ranks_equal: ranks_equal,
        original: orig,
        quotient: quot,
    })
}

fn same_after_projection(k: &SimplicialComplex, q: &SimplicialComplex, projection: &[PointId]) -> bool {
    if k.max_dim() != q.max_dim() {
        return false;
    }
    (0..=k.max_dim()).all(|d| {
        let mut mapped: Vec<Vec<PointId>> = k
            .simplices(d)
            .iter()
            .map(|s| {
                let mut t: Vec<PointId> = s.iter().map(|&p| projection[p]).collect();
                t.sort_unstable();
                t
            })
            .collect();
        mapped.sort();
        mapped.as_slice() == q.simplices(d)
    })
}

/// Sampling plan for [`check_acyclicity_at_infinity`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    /// Ball radii; defaults to the scale times 1, 2, 3, 5, 8.
    pub radii: Option<Vec<f64>>,
    pub centers_per_radius: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(seed: u64) -> Self {
        Self { radii: None, centers_per_radius: 8, seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub center: PointId,
    pub ball_radius: f64,
    pub diameter: f64,
    pub neighborhood_radius: f64,
    /// Homological degree of the surviving cycle (reduced in degree 0).
    pub degree: usize,
    /// A cycle of the ball that does not bound in the neighborhood.
    pub witness: Vec<(Vec<PointId>, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcyclicityReport {
    pub label: String,
    pub pass: bool,
    pub balls_checked: usize,
    /// Candidate balls skipped because their neighborhood reaches the truncation.
    pub skipped_near_truncation: usize,
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Samples balls `B` with `d(base, B) >= μ(diam B)` and checks that every
/// reduced homology class of `Rips(B)` in degrees below `max_dim` dies in
/// `Rips(N_ρ(diam B)(B))`. Over GF(2) unless `ring` is the rationals
/// (integer requests are answered over the rationals).
pub fn check_acyclicity_at_infinity(
    space: &FiniteMetricSpace,
    base: &Selection,
    controls: &ControlFunctions,
    sample: &SampleSpec,
    scale: f64,
    max_dim: usize,
    ring: Ring,
) -> Result<AcyclicityReport> {
    match ring {
        Ring::Gf2 => acyclicity::<Gf2>(space, base, controls, sample, scale, max_dim),
        _ => acyclicity::<BigRational>(space, base, controls, sample, scale, max_dim),
    }
}

fn acyclicity<F: Field>(
    space: &FiniteMetricSpace,
    base: &Selection,
    controls: &ControlFunctions,
    sample: &SampleSpec,
    scale: f64,
    max_dim: usize,
) -> Result<AcyclicityReport> {
    if base.is_empty() {
        return Err(Error::EmptySubset);
    }
    if max_dim == 0 {
        return Err(Error::InvalidParameter("max_dim must be at least 1".into()));
    }
    let radii = sample
        .radii
        .clone()
        .unwrap_or_else(|| [1.0, 2.0, 3.0, 5.0, 8.0].iter().map(|m| m * scale).collect());
    let limit = crate::towers::reliable_radius(space, scale);
    let origin = base.iter().next().expect("nonempty");
    let mut rng = ChaCha8Rng::seed_from_u64(sample.seed);
    let mut report = AcyclicityReport {
        label: ACYCLICITY_LABEL.to_string(),
        pass: true,
        balls_checked: 0,
        skipped_near_truncation: 0,
        violations: Vec::new(),
        warning: None,
    };
    for &t in &radii {
        // admissible centers, in point order so the seeded choice is reproducible
        let mut candidates: Vec<(PointId, Selection, f64, f64)> = Vec::new();
        for c in 0..space.len() {
            let ball = space.neighborhood(&Selection::single(space.len(), c)?, t)?;
            let diam = space.diameter_of(ball.members());
            let far = ball.iter().map(|p| space.dist_to_set(p, base)).fold(f64::INFINITY, f64::min);
            if far + DIST_TOL < controls.mu.eval(diam) {
                continue;
            }
            let rho = controls.rho.eval(diam);
            let reach = ball.iter().map(|p| space.dist(origin, p)).fold(0.0, f64::max) + rho;
            if reach > limit {
                report.skipped_near_truncation += 1;
                continue;
            }
            candidates.push((c, ball, diam, rho));
        }
        let chosen: Vec<_> = candidates.choose_multiple(&mut rng, sample.centers_per_radius).cloned().collect();
        let mut chosen = chosen;
        chosen.sort_by_key(|c| c.0);
        for (c, ball, diam, rho) in chosen {
            report.balls_checked += 1;
            let nb = space.neighborhood(&ball, rho)?;
            let kb = rips_complex(space, &ball, scale, max_dim)?;
            let kn = rips_complex(space, &nb, scale, max_dim)?;
            let inc = InclusionMap::new(&kb, &kn)?;
            for k in 0..max_dim {
                if let Some(w) = surviving_cycle::<F>(&kb, &kn, &inc, k) {
                    report.violations.push(Violation {
                        center: c,
                        ball_radius: t,
                        diameter: diam,
                        neighborhood_radius: rho,
                        degree: k,
                        witness: w
                            .iter()
                            .map(|(i, v)| (kb.simplices(k)[*i].clone(), v.to_repr()))
                            .collect(),
                    });
                }
            }
        }
    }
    report.pass = report.violations.is_empty();
    if report.balls_checked == 0 {
        report.warning = Some("no admissible balls were sampled; the pass is vacuous".into());
    }
    Ok(report)
}

/// First reduced `k`-cycle of `kb` that is not a boundary in `kn`.
fn surviving_cycle<F: Field>(
    kb: &SimplicialComplex,
    kn: &SimplicialComplex,
    inc: &InclusionMap,
    k: usize,
) -> Option<SparseVec<F>> {
    let cycles: Vec<SparseVec<F>> = if k == 0 {
        (1..kb.count(0))
            .map(|i| SparseVec::from_entries(vec![(0, F::one().neg()), (i, F::one())]))
            .collect()
    } else {
        rank_kernel_image(&kb.boundary_matrix::<F>(k)).kernel
    };
    if cycles.is_empty() {
        return None;
    }
    let boundaries: SparseMatrix<F> = if k + 1 <= kn.max_dim() {
        kn.boundary_matrix(k + 1)
    } else {
        SparseMatrix::zeros(kn.count(k), 0)
    };
    let red = ColumnReduction::new(&boundaries, false);
    let mut image = PivotBasis::new();
    for r in red.reduced.iter().filter(|r| !r.is_zero()) {
        image.insert(r, None);
    }
    cycles
        .into_iter()
        .find(|z| !image.reduce(&inc.push_forward(k, z)).residual.is_zero())
}
