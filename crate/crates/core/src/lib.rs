//! Decision-tree rank and chain-of-thought depth of single-layer
//! hard-attention decoders, with compilers in both directions.

pub mod commcomp;
pub mod compiler;
pub mod decoder;
pub mod domain;
pub mod error;
pub mod hardness;
pub mod learning;
pub mod rank;
pub mod trees;

pub use error::{Error, Result};
