//! Cohomology of finite cochain complexes given by coboundary matrices.
//!
//! A complex is stored as `maps[k] = δ^{k-1}: C^{k-1} -> C^k`. For reduced
//! cohomology `maps[0]` is the augmentation (a single column of ones); for
//! ordinary cohomology it has no columns.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::reduce::{ColumnReduction, PivotBasis};
use crate::linalg::snf::{prime_power_parts, smith_normal_form};
use crate::linalg::sparse::{SparseMatrix, SparseVec};
use crate::ring::{Coeff, Field};

/// Free rank and torsion (prime-power orders) of one cohomology group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyGroup {
    pub degree: usize,
    pub free_rank: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub torsion: Vec<u64>,
}

impl CohomologyGroup {
    pub fn free(degree: usize, free_rank: usize) -> Self {
        Self { degree, free_rank, torsion: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl std::fmt::Display for CohomologyGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Coboundary maps of a finite cochain complex, lowest degree first.
#[derive(Clone, Debug)]
pub struct CoboundaryChain<F> {
    cells: Vec<usize>,
    maps: Vec<SparseMatrix<F>>,
    reduced: bool,
}

impl<F: Coeff> CoboundaryChain<F> {
    /// `coboundaries[k] = δ^k: C^k -> C^{k+1}`; `cells[k] = dim C^k`. Groups
    /// are available in degrees `0..cells.len() - 1`.
    pub fn new(cells: Vec<usize>, coboundaries: Vec<SparseMatrix<F>>, reduced: bool) -> Result<Self> {
        if cells.is_empty() || coboundaries.len() + 1 != cells.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coboundaries for {} cochain groups",
                coboundaries.len(),
                cells.len()
            )));
        }
        for (k, d) in coboundaries.iter().enumerate() {
            if d.ncols() != cells[k] || d.nrows() != cells[k + 1] {
                return Err(Error::DimensionMismatch(format!(
                    "δ^{k} is {}x{}, expected {}x{}",
                    d.nrows(),
                    d.ncols(),
                    cells[k + 1],
                    cells[k]
                )));
            }
        }
        let augmentation = if reduced {
            SparseMatrix::from_columns(
                cells[0],
                vec![SparseVec::from_entries((0..cells[0]).map(|i| (i, F::one())).collect())],
            )
        } else {
            SparseMatrix::zeros(cells[0], 0)
        };
        let mut maps = Vec::with_capacity(cells.len());
        maps.push(augmentation);
        maps.extend(coboundaries);
        Ok(Self { cells, maps, reduced })
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// Highest degree whose group is computable.
    pub fn top_degree(&self) -> usize {
        self.cells.len() - 2
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// `δ^k` for `k >= 0`.
    pub fn coboundary(&self, k: usize) -> &SparseMatrix<F> {
        &self.maps[k + 1]
    }

    fn check_degree(&self, max_degree: usize) -> Result<()> {
        if self.cells.len() < 2 || max_degree > self.top_degree() {
            return Err(Error::DimensionMismatch(format!(
                "degree {max_degree} needs cochains up to degree {}",
                max_degree + 1
            )));
        }
        Ok(())
    }
}

/// Groups over a field: `dim H^k = n_k - rank δ^k - rank δ^{k-1}`.
pub fn field_groups<F: Field>(c: &CoboundaryChain<F>, max_degree: usize) -> Result<Vec<CohomologyGroup>> {
    c.check_degree(max_degree)?;
    let mut ranks = Vec::with_capacity(max_degree + 2);
    let mut cleared: Vec<bool> = Vec::new();
    for k in 0..=max_degree + 1 {
        let red = ColumnReduction::with_clearing(&c.maps[k], false, &cleared);
        ranks.push(red.rank());
        cleared = vec![false; c.maps[k].nrows()];
        for p in red.pivot_rows() {
            cleared[p] = true;
        }
    }
    Ok((0..=max_degree)
        .map(|k| CohomologyGroup::free(k, c.cells[k] - ranks[k + 1] - ranks[k]))
        .collect())
}

/// Groups over the integers from Smith normal forms of the coboundaries.
/// The torsion of `H^k` is read from the invariant factors of `δ^{k-1}`.
pub fn integer_groups(c: &CoboundaryChain<BigInt>, max_degree: usize) -> Result<Vec<CohomologyGroup>> {
    c.check_degree(max_degree)?;
    let snfs: Vec<_> = (0..=max_degree + 1).map(|k| smith_normal_form(&c.maps[k])).collect();
    Ok((0..=max_degree)
        .map(|k| {
            let free_rank = c.cells[k] - snfs[k + 1].rank() - snfs[k].rank();
            let mut torsion: Vec<u64> = snfs[k]
                .invariants
                .iter()
                .filter(|d| !One::is_one(*d))
                .flat_map(prime_power_parts)
                .collect();
            torsion.sort_unstable();
            CohomologyGroup { degree: k, free_rank, torsion }
        })
        .collect())
}

/// A basis of `H^k` by cocycle representatives, plus the echelon data needed
/// to write any cocycle in that basis.
#[derive(Clone, Debug)]
pub struct CohomologyBasis<F> {
    pub degree: usize,
    echelon: PivotBasis<F>,
    /// Position in `echelon` of each class representative.
    class_slots: Vec<usize>,
}

impl<F: Field> CohomologyBasis<F> {
    pub fn rank(&self) -> usize {
        self.class_slots.len()
    }

    pub fn representative(&self, class: usize) -> &SparseVec<F> {
        self.echelon.vector(self.class_slots[class])
    }

    pub fn representatives(&self) -> impl Iterator<Item = &SparseVec<F>> {
        self.class_slots.iter().map(|&s| self.echelon.vector(s))
    }

    /// Coordinates of the class of the cocycle `z`.
    pub fn coordinates(&self, z: &SparseVec<F>) -> Result<SparseVec<F>> {
        let red = self.echelon.reduce(z);
        if !red.residual.is_zero() {
            return Err(Error::InvalidParameter(format!(
                "vector is not a degree-{} cocycle",
                self.degree
            )));
        }
        Ok(SparseVec::from_entries(
            red.coeffs
                .iter()
                .filter_map(|(slot, c)| self.echelon.tag(*slot).map(|class| (class, c.clone())))
                .collect(),
        ))
    }
}

/// Cocycle bases of `H^0, ..., H^max_degree`.
///
/// Columns of `δ^k` are reduced left to right with clearing. Zero columns
/// whose index is not a pivot row of `δ^{k-1}` are the essential ones; their
/// transform columns are cocycles independent modulo coboundaries and count
/// exactly `dim H^k`. Together with the reduced columns of `δ^{k-1}` they
/// form an echelon basis of the cocycles with distinct pivots.
pub fn field_cohomology_basis<F: Field>(
    c: &CoboundaryChain<F>,
    max_degree: usize,
) -> Result<Vec<CohomologyBasis<F>>> {
    c.check_degree(max_degree)?;
    let mut out = Vec::with_capacity(max_degree + 1);
    let mut prev = ColumnReduction::new(&c.maps[0], false);
    for k in 0..=max_degree {
        let mut cleared = vec![false; c.cells[k]];
        for p in prev.pivot_rows() {
            cleared[p] = true;
        }
        let cur = ColumnReduction::with_clearing(&c.maps[k + 1], true, &cleared);
        let mut echelon = PivotBasis::new();
        for r in prev.reduced.iter().filter(|r| !r.is_zero()) {
            echelon.insert(r, None);
        }
        let mut class_slots = Vec::new();
        for j in 0..c.cells[k] {
            if cleared[j] || !cur.reduced[j].is_zero() {
                continue;
            }
            let slot = echelon
                .insert(&cur.transform[j], Some(class_slots.len()))
                .expect("essential cocycle lies in the span of earlier ones");
            class_slots.push(slot);
        }
        out.push(CohomologyBasis { degree: k, echelon, class_slots });
        prev = cur;
    }
    Ok(out)
}

/// Matrix of a linear map between cohomology groups, columns indexed by
/// source classes and rows by target classes.
pub fn induced_map<F: Field>(
    source: &CohomologyBasis<F>,
    target: &CohomologyBasis<F>,
    restrict: impl Fn(&SparseVec<F>) -> SparseVec<F>,
) -> Result<SparseMatrix<F>> {
    let cols = source
        .representatives()
        .map(|z| target.coordinates(&restrict(z)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseMatrix::from_columns(target.rank(), cols))
}
