//! Response graphs, their decomposition into response trees, and mechanical
//! checks of the competitive analysis on concrete runs.
//!
//! Everything here operates on unit instances (adversary capacity one per
//! site, online capacity `k`); [`crate::instance::split_unit`] produces them.

mod graph;
mod lemmas;
mod metrics;
mod tree;

pub use graph::{build_response_graph, ResponseGraph};
pub use lemmas::{check_lemmas, Check, Failure, Inequality, LemmaOptions, LemmaReport, Tally, TreeRecord};
pub use metrics::{
    adversary_levels, edge_coefficients, leaf_distance, tree_costs, weighted_cost_closed_form, weighted_tree_cost,
    LeafDistances,
};
pub use tree::{decompose, ResponseTree, TreeBuilder, TreeNode};

use thiserror::Error;

use crate::instance::{InstanceError, RequestId, SiteId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("analysis requires k >= 3, got k = {0}")]
    KTooSmall(u32),
    #[error("response graphs need a unit instance; site {site} has capacity {capacity}")]
    NotUnit { site: SiteId, capacity: u64 },
    #[error("unfull history does not match the online assignment")]
    HistoryMismatch,
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("tree rooted at request {root}: site {site} reached twice")]
    Cycle { root: RequestId, site: SiteId },
    #[error("tree rooted at request {root}: site {site} has {found} remaining online edges, more than k = {k}")]
    ChildCount { root: RequestId, site: SiteId, found: usize, k: u32 },
    #[error(
        "tree rooted at request {root}: site {site} has {remaining} remaining online edges but was {} when the root arrived",
        if *.unfull { "unfull" } else { "full" }
    )]
    LeafRule { root: RequestId, site: SiteId, remaining: usize, unfull: bool },
    #[error("tree rooted at request {root}: request {request} is already in another tree")]
    Reused { root: RequestId, request: RequestId },
    #[error("malformed tree: {0}")]
    Malformed(String),
}
