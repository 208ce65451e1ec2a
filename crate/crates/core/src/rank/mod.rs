//! Exact rank oracles and the close/far permutation machinery.
//!
//! Three independent searches compute the minimal depth of an a-query tree:
//! a dynamic program over YES-NO games on products of letter sets, a direct
//! minimax over all query orders on word sets, and a multi-head brute force.
//! They share nothing but the function table, so agreement between them is
//! meaningful.
//!
//! YES-depth equals rank on every finite domain, not only binary ones: an
//! a-query costs one YES edge when simulated question by question, and a
//! YES-NO tree turns back into an a-query tree by listing the questions of
//! each NO-chain.

mod close;
mod minimax;
mod yesdepth;

use serde::{Deserialize, Serialize};

use crate::domain::FunctionTable;
use crate::error::Result;
use crate::trees::DecisionTree;

pub use crate::domain::Restriction as RestrictionState;
pub use close::{common_top_element, is_close, lemma_threshold_holds, random_close_permutation};
pub use minimax::{mh_depth1_search, mh_rank_bruteforce, rank_exact_minimax, MhRank, DEFAULT_MAX_ASSIGNMENTS};
pub use yesdepth::rank_exact_yesdepth;

pub(crate) use minimax::next_permutation;

/// A computed rank with a tree achieving it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCertificate {
    #[serde(rename = "rank")]
    pub value: usize,
    /// The search proved that no shallower tree exists.
    pub exhausted: bool,
    #[serde(flatten)]
    pub witness: DecisionTree,
}

impl RankCertificate {
    /// Checks the witness depth and its agreement with `f` on every word.
    pub fn verify(&self, f: &FunctionTable, budget: usize) -> Result<bool> {
        Ok(self.witness.depth() == self.value && self.witness.computes(f, budget)?)
    }
}
