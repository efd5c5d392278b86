//! Exact linear algebra over GF(2), the rationals and the integers.

pub mod bitmat;
pub mod reduce;
pub mod snf;
pub mod sparse;

pub use bitmat::BitMatrix;
pub use reduce::{rank, rank_kernel_image, solve_in_subspace, ColumnReduction, PivotBasis, RankKernelImage};
pub use snf::{smith_normal_form, smith_normal_form_with_transforms, SnfDecomposition, SnfResult};
pub use sparse::{ChainVector, MatrixRecord, SparseMatrix, SparseVec};
