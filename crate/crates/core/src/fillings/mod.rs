//! Chain-level machinery on finitely supported tuple chains: controlled
//! fillings `M` and `S`, cone homotopies, and the operator `T` with its
//! support audit.

pub mod chain;
pub mod filling;
pub mod homotopy;
pub mod operator;

pub use chain::{
    certificate_from_samples, tuples_of_width, ChainMapRecord, ChainRecord, ControlledChainMap, FarSubcomplexSpec,
    FinSuppChain,
};
pub use filling::{
    cover_filling_s, face_closure, fill_domain, filling_map_m, Cover, FailureCause, FillingFailure, FillingOptions,
    FillingResult, FILL_GROWTH,
};
pub use homotopy::{cone_homotopy_d, random_controlled_map, ChainHomotopy, HomotopyRecord};
pub use operator::{adapted_cover, operator_t, random_bounded_cochain, ClaimCheck, OperatorAudit, OperatorOutput};
