//! Tessellated sparse factorization for multi-user distributed computing of
//! linearly decomposable functions.
//!
//! A demand matrix `F` (users x subfunctions) is split into rectangular tiles
//! no larger than `Delta x Gamma`; each tile is factored by SVD and its rank-one
//! terms are assigned to servers. The result is a sparse communication matrix
//! `D` and computing matrix `E` with `DE = F` (lossless) or the best
//! approximation for a given server budget (lossy).

pub mod capacity;
pub mod error;
pub mod factorization;
pub mod matrix;
pub mod model;
pub mod mp;
pub mod protocol;
pub mod svd;
pub mod tessellation;

pub use capacity::{
    capacity_report, capacity_simple, gap_ratio, n_lower, n_opt_upper, optimality_status,
    tradeoff_points, CapacityReport, Exactness,
};
pub use error::{Result, TessError};
pub use factorization::{
    factorize_lossless, factorize_lossy, has_balanced_supports, has_disjoint_supports,
    residual_error, Factorization, TileReport,
};
pub use matrix::{Matrix, SupportMask};
pub use model::{DemandMatrix, FactorPair, OutputVector, Rational, SchemeParams};
pub use protocol::{run_end_to_end, SimulationReport};
pub use tessellation::{build_tessellation, Tile, TileFamily, TilePlan};
