//! Per-level invariants of a group chain and the Steinitz orders built from
//! them.

mod engine;
mod report;
mod spec;

pub use engine::{
    k_star_compute, level_invariants, verify_level, Backend, EngineOptions, KStar, KStarStatus, LevelInvariants,
    OracleLevel,
};
pub use report::{
    assert_consistent, chain_report, chain_report_verified, lagrange_check, normal_form_check, ChainReport, NormalForm,
};
pub use spec::{heis, ChainSpec, LevelRule, PredictedOrders};

pub(crate) use engine::LevelCache;

