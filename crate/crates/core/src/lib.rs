//! Discovery of string transformations that make two text columns
//! equi-joinable, and the join itself.
//!
//! The usual flow is: pair up rows ([`row_match`]), generate candidate
//! transformations from placeholder skeletons ([`placeholder`],
//! [`candidates`]), measure their coverage ([`coverage`]), pick a small
//! covering set, and join with it ([`joiner`]). [`pipeline`] wires these
//! stages together.

pub mod candidates;
pub mod config;
pub mod coverage;
pub mod grammar;
pub mod io;
pub mod joiner;
pub mod oracle;
pub mod pipeline;
pub mod placeholder;
pub mod row_match;
pub mod synthgen;
pub mod table;
pub mod transform;

pub use candidates::{generate_candidates, CandidatePool, GenerationConfig};
pub use config::{Normalization, RunConfig};
pub use coverage::{
    detection_probability, evaluate_coverage, greedy_min_cover, top_k, CoverageRecord, NonCoveringCache,
};
pub use grammar::{parse_transformation, print_transformation, ParseError};
pub use joiner::{evaluate_join, transform_join, JoinMetrics, JoinResult};
pub use placeholder::SkeletonLimits;
pub use row_match::find_candidate_pairs;
pub use table::{CandidatePair, ColumnTable, RowId};
pub use transform::{apply_transformation, apply_unit, covers, Transformation, Unit, UnitKind, UnitKinds};
