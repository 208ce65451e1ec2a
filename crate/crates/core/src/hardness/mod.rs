//! Hard instances for learning rank-1 trees with two heads.
//!
//! Monotone NAE-3-SAT reduces to 2-order separability (find two linear
//! orders on a universe such that no set of `F` and set of `G` share both
//! maxima), which reduces to consistency of a binary sample with a depth-1
//! tree over 2-degree a-queries. Both reductions come with order builders
//! for the forward direction and brute-force checkers at small sizes.

mod nae;
mod sample;
mod separability;

pub use nae::NAEFormula;
pub use sample::{
    aux_ones, gadget_orders, gadget_rows, gadget_sample, lift_orders, reduce_2order_to_sample, sample_separates,
    tree_from_orders,
};
pub use separability::{
    maxima_pair, orders_from_assignment, reduce_nae_to_2order, separates, two_order_separable_bruteforce, OrderPair,
    SetFamilyInstance, DEFAULT_MAX_UNIVERSE,
};
