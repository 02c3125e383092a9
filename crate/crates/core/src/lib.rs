//! Optimal-protecting rounded (OPR) gateway sets for BGP transit traffic.
//!
//! The crate keeps hot-potato routing optimal across any single IGP event by
//! pre-computing, per prefix, the smallest β-ordered union of routes whose
//! gateways are reachable through two node-disjoint paths. Prefixes sharing the
//! same set share one data-plane entry, so reacting to an IGP event costs a
//! min-search per distinct set instead of a decision process per prefix.
//!
//! Modules:
//! - [`graph`]: IGP topology, SPF, single-event mutation, disjointness test.
//! - [`bgp`]: routes, β/α attributes and the reference decision process.
//! - [`control_plane`]: per-prefix β-sorted leaf lists and OPR extraction.
//! - [`data_plane`]: shared OPR sets, content hashing, `update_opr`.
//! - [`engine`]: BGP/IGP event handling, scenarios, fuzzing, instance generation.
//! - [`analytics`]: closed-form counting model and its Monte-Carlo check.

pub mod analytics;
pub mod bgp;
pub mod control_plane;
pub mod data_plane;
pub mod engine;
mod error;
pub mod graph;
mod text;

pub use error::{Error, Result};

/// The bundled two-prefix example: a topology where the failure of the
/// one-way link `a -> c` reverses the ranking of three gateways.
pub mod assets {
    pub const FIG2_TOPOLOGY: &str = include_str!("../assets/fig2.topo");
    pub const FIG2_RIB: &str = include_str!("../assets/fig2.rib");
    pub const FIG2_SCENARIO: &str = include_str!("../assets/fig2.scenario");
}
