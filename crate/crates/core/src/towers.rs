//! Complement towers `r -> X - N_r(base)` and their persistent ranks.
//!
//! Each stage is the Rips complex of a complement at a fixed scale. As `r`
//! grows the complements shrink, so restriction of cocycles gives maps
//! `H(stage i) -> H(stage j)` for `i < j`. Only adjacent maps are computed
//! directly; longer maps are their products in the fixed stage bases, which
//! is exact because restriction is functorial.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohomology::{field_cohomology_basis, induced_map, integer_groups, CohomologyBasis, CohomologyGroup};
use crate::error::{Error, Result};
use crate::linalg::reduce::rank;
use crate::linalg::sparse::{MatrixRecord, SparseMatrix};
use crate::metric::{FiniteMetricSpace, Selection};
use crate::ring::{Field, Gf2, Ring};
use crate::simplicial::{rips_complex, InclusionMap, SimplicialComplex};

/// Default window and stability length for [`colimit_analysis`].
pub const DEFAULT_WINDOW: usize = 2;
pub const DEFAULT_STABILITY: usize = 3;
/// Default number of stages in a generated radius grid.
pub const DEFAULT_STAGES: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerParams {
    pub r_grid: Vec<f64>,
    pub scale: f64,
    /// Highest cohomology degree computed per stage.
    pub max_degree: usize,
    pub ring: Ring,
}

/// `count` radii spaced geometrically from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi > lo) || count < 2 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < lo < hi and at least two stages, got ({lo}, {hi}, {count})"
        )));
    }
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    Ok((0..count).map(|k| if k + 1 == count { hi } else { lo * ratio.powi(k as i32) }).collect())
}

/// Default grid: 12 geometric stages from the scale to half the truncation
/// radius, stopping one scale short of the farthest point from `base` so the
/// last complement is not empty.
pub fn default_r_grid(space: &FiniteMetricSpace, base: &Selection, scale: f64) -> Result<Vec<f64>> {
    if base.is_empty() {
        return Err(Error::EmptySubset);
    }
    let half = space.truncation_radius().unwrap_or_else(|| space.diameter()) / 2.0;
    let farthest = (0..space.len()).map(|x| space.dist_to_set(x, base)).fold(0.0, f64::max);
    geometric_grid(scale, half.min(farthest - scale), DEFAULT_STAGES)
}

/// Stages with `r` beyond this radius may see the truncation boundary.
pub fn reliable_radius(space: &FiniteMetricSpace, scale: f64) -> f64 {
    match (space.is_unbounded_model(), space.truncation_radius()) {
        (true, Some(t)) => t - 2.0 * scale,
        _ => f64::INFINITY,
    }
}

/// Tower over a field, keeping complexes, cocycle bases and adjacent maps.
#[derive(Clone, Debug)]
pub struct FieldTower<F> {
    pub radii: Vec<f64>,
    pub selections: Vec<Selection>,
    pub complexes: Vec<SimplicialComplex>,
    /// `bases[stage][degree]`.
    pub bases: Vec<Vec<CohomologyBasis<F>>>,
    /// `adjacent[stage][degree]` is the map from `stage` to `stage + 1`.
    pub adjacent: Vec<Vec<SparseMatrix<F>>>,
    pub max_degree: usize,
}

impl<F: Field> FieldTower<F> {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn betti(&self, stage: usize, degree: usize) -> usize {
        self.bases[stage][degree].rank()
    }

    /// Map `H^degree(stage i) -> H^degree(stage j)` for `i <= j`.
    pub fn map(&self, degree: usize, i: usize, j: usize) -> SparseMatrix<F> {
        assert!(i <= j && j < self.len(), "invalid stage pair ({i}, {j})");
        let mut m = SparseMatrix::identity(self.betti(i, degree));
        for k in i..j {
            m = self.adjacent[k][degree].mul(&m);
        }
        m
    }

    pub fn persistent_rank(&self, degree: usize, i: usize, j: usize) -> usize {
        rank(&self.map(degree, i, j))
    }

    /// Computes the restriction map between two stages directly from the
    /// cocycle bases, bypassing the adjacent products.
    pub fn direct_map(&self, degree: usize, i: usize, j: usize) -> Result<SparseMatrix<F>> {
        let inc = InclusionMap::new(&self.complexes[j], &self.complexes[i])?;
        induced_map(&self.bases[i][degree], &self.bases[j][degree], |z| inc.restrict(degree, z))
    }
}

fn validate_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() {
        return Err(Error::EmptyTower);
    }
    if r_grid.iter().any(|r| !r.is_finite() || *r < 0.0) || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("radius grid must be finite, >= 0 and increasing".into()));
    }
    Ok(())
}

/// Nonempty complements `X - N_r(base)` for the grid, truncated at the first
/// empty one.
fn complement_stages(space: &FiniteMetricSpace, base: &Selection, r_grid: &[f64]) -> Result<(Vec<f64>, Vec<Selection>)> {
    validate_grid(r_grid)?;
    if base.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut radii = Vec::new();
    let mut sels = Vec::new();
    for &r in r_grid {
        let sel = space.complement_of_neighborhood(base, r)?;
        if sel.is_empty() {
            log::warn!("complement is empty at r = {r}; dropping this and later stages");
            break;
        }
        radii.push(r);
        sels.push(sel);
    }
    if radii.is_empty() {
        return Err(Error::EmptyTower);
    }
    Ok((radii, sels))
}

/// Builds the tower over a field.
pub fn build_field_tower<F: Field>(
    space: &FiniteMetricSpace,
    base: &Selection,
    r_grid: &[f64],
    scale: f64,
    max_degree: usize,
) -> Result<FieldTower<F>> {
    let (radii, selections) = complement_stages(space, base, r_grid)?;
    let staged: Vec<(SimplicialComplex, Vec<CohomologyBasis<F>>)> = selections
        .par_iter()
        .map(|sel| {
            let k = rips_complex(space, sel, scale, max_degree + 1)?;
            let chain = k.cochain_complex::<F>(max_degree, true)?;
            let bases = field_cohomology_basis(&chain, max_degree)?;
            Ok((k, bases))
        })
        .collect::<Result<_>>()?;
    let (complexes, bases): (Vec<_>, Vec<_>) = staged.into_iter().unzip();
    let adjacent = (0..radii.len().saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let inc = InclusionMap::new(&complexes[i + 1], &complexes[i])?;
            (0..=max_degree)
                .map(|d| induced_map(&bases[i][d], &bases[i + 1][d], |z| inc.restrict(d, z)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldTower { radii, selections, complexes, bases, adjacent, max_degree })
}

/// One stage of a [`Tower`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub radius: f64,
    pub points: usize,
    /// Simplex counts per dimension.
    pub simplices: Vec<usize>,
    /// Reduced cohomology per degree.
    pub groups: Vec<CohomologyGroup>,
    /// False when the stage may see the truncation boundary.
    pub reliable: bool,
}

/// Ring-independent tower summary: stage groups and induced-map data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tower {
    pub params: TowerParams,
    pub base_size: usize,
    pub stages: Vec<StageSummary>,
    /// `persistent_ranks[degree][i][j]` for `i <= j` (zero below the diagonal).
    pub persistent_ranks: Vec<Vec<Vec<usize>>>,
    /// Induced matrices, one entry per `(degree, i, j)` with `i < j`.
    pub maps: Vec<MapRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub degree: usize,
    pub from: usize,
    pub to: usize,
    pub matrix: MatrixRecord,
}

impl Tower {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn betti(&self, stage: usize, degree: usize) -> usize {
        self.stages[stage].groups[degree].free_rank
    }

    pub fn persistent_rank(&self, degree: usize, i: usize, j: usize) -> usize {
        self.persistent_ranks[degree][i][j]
    }

    /// Number of leading stages not affected by truncation.
    pub fn reliable_len(&self) -> usize {
        self.stages.iter().take_while(|s| s.reliable).count()
    }

    /// Plot-ready rows `r, degree, betti, persistent_rank`, where the rank is
    /// that of the map to the next stage (`NA` on the last stage).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("r\tdegree\tbetti\tpersistent_rank\n");
        for (i, st) in self.stages.iter().enumerate() {
            for g in &st.groups {
                let pr = if i + 1 < self.len() {
                    self.persistent_rank(g.degree, i, i + 1).to_string()
                } else {
                    "NA".to_string()
                };
                let _ = writeln!(out, "{}\t{}\t{}\t{}", st.radius, g.degree, g.free_rank, pr);
            }
        }
        out
    }
}

fn summarize<F: Field>(
    space: &FiniteMetricSpace,
    t: &FieldTower<F>,
    params: &TowerParams,
    base_size: usize,
    groups: Vec<Vec<CohomologyGroup>>,
) -> Tower {
    let limit = reliable_radius(space, params.scale);
    let stages = (0..t.len())
        .map(|i| StageSummary {
            radius: t.radii[i],
            points: t.selections[i].len(),
            simplices: t.complexes[i].counts(),
            groups: groups[i].clone(),
            reliable: t.radii[i] <= limit,
        })
        .collect();
    let n = t.len();
    let mut persistent_ranks = vec![vec![vec![0; n]; n]; params.max_degree + 1];
    let mut maps = Vec::new();
    for d in 0..=params.max_degree {
        for i in 0..n {
            let mut m = SparseMatrix::identity(t.betti(i, d));
            persistent_ranks[d][i][i] = t.betti(i, d);
            for j in i + 1..n {
                m = t.adjacent[j - 1][d].mul(&m);
                persistent_ranks[d][i][j] = rank(&m);
                maps.push(MapRecord { degree: d, from: i, to: j, matrix: MatrixRecord::from(&m) });
            }
        }
    }
    Tower { params: params.clone(), base_size, stages, persistent_ranks, maps }
}

/// Builds the complement tower about `base` and summarizes it. Over the
/// integers the stage groups come from Smith normal forms and the maps are
/// computed over the rationals (ranks of the free parts).
pub fn build_complement_tower(space: &FiniteMetricSpace, base: &Selection, params: &TowerParams) -> Result<Tower> {
    let TowerParams { r_grid, scale, max_degree, ring } = params;
    match ring {
        Ring::Gf2 => {
            let t = build_field_tower::<Gf2>(space, base, r_grid, *scale, *max_degree)?;
            let groups = field_groups_of(&t);
            Ok(summarize(space, &t, params, base.len(), groups))
        }
        Ring::Rational => {
            let t = build_field_tower::<BigRational>(space, base, r_grid, *scale, *max_degree)?;
            let groups = field_groups_of(&t);
            Ok(summarize(space, &t, params, base.len(), groups))
        }
        Ring::Integer => {
            let t = build_field_tower::<BigRational>(space, base, r_grid, *scale, *max_degree)?;
            let groups = t
                .complexes
                .par_iter()
                .map(|k| complex_cohomology(k, Ring::Integer, *max_degree, true))
                .collect::<Result<Vec<_>>>()?;
            Ok(summarize(space, &t, params, base.len(), groups))
        }
    }
}

fn field_groups_of<F: Field>(t: &FieldTower<F>) -> Vec<Vec<CohomologyGroup>> {
    t.bases
        .iter()
        .map(|bs| bs.iter().map(|b| CohomologyGroup::free(b.degree, b.rank())).collect())
        .collect()
}

/// Reduced cohomology of a complex in degrees `0..=max_degree`. The complex
/// must contain simplices up to dimension `max_degree + 1`.
pub fn reduced_cohomology(k: &SimplicialComplex, ring: Ring, max_degree: usize) -> Result<Vec<CohomologyGroup>> {
    complex_cohomology(k, ring, max_degree, true)
}

/// Simplicial cohomology of a complex, reduced or not, in degrees
/// `0..=max_degree`.
pub fn complex_cohomology(
    k: &SimplicialComplex,
    ring: Ring,
    max_degree: usize,
    reduced: bool,
) -> Result<Vec<CohomologyGroup>> {
    if k.is_empty() {
        return Err(Error::EmptyComplex);
    }
    match ring {
        Ring::Gf2 => crate::cohomology::field_groups(&k.cochain_complex::<Gf2>(max_degree, reduced)?, max_degree),
        Ring::Rational => {
            crate::cohomology::field_groups(&k.cochain_complex::<BigRational>(max_degree, reduced)?, max_degree)
        }
        Ring::Integer => integer_groups(&k.cochain_complex::<BigInt>(max_degree, reduced)?, max_degree),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Stabilized { rank: usize },
    NonStabilized { sequence: Vec<usize> },
}

impl Verdict {
    pub fn stabilized_rank(&self) -> Option<usize> {
        match self {
            Verdict::Stabilized { rank } => Some(*rank),
            Verdict::NonStabilized { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeColimit {
    pub degree: usize,
    /// `rank map(i, i + window)` over the analysed stages.
    pub persistent_ranks: Vec<usize>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColimitReport {
    pub window: usize,
    pub stability: usize,
    /// Stages used (the reliable prefix of the tower).
    pub stages_used: usize,
    pub degrees: Vec<DegreeColimit>,
}

/// Finite approximation of the colimit rank per degree. The verdict is
/// `STABILIZED` when the last `stability` persistent ranks agree. This is a
/// heuristic on a finite grid, not a proof of the limit.
pub fn colimit_analysis(t: &Tower, window: usize, stability: usize) -> Result<ColimitReport> {
    if window == 0 || stability == 0 {
        return Err(Error::InvalidParameter("window and stability must be positive".into()));
    }
    let m = t.reliable_len();
    if m < window + stability {
        return Err(Error::InsufficientStages { have: m, need: window + stability });
    }
    let degrees = (0..=t.params.max_degree)
        .map(|d| {
            let seq: Vec<usize> = (0..m - window).map(|i| t.persistent_rank(d, i, i + window)).collect();
            let tail = &seq[seq.len() - stability..];
            let verdict = if tail.iter().all(|&x| x == tail[0]) {
                Verdict::Stabilized { rank: tail[0] }
            } else {
                Verdict::NonStabilized { sequence: seq.clone() }
            };
            DegreeColimit { degree: d, persistent_ranks: seq, verdict }
        })
        .collect();
    Ok(ColimitReport { window, stability, stages_used: m, degrees })
}
