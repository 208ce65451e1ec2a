//! Unique-hard-attention layers and the chain-of-thought decoder loop.
//!
//! A layer with `H` heads maps a sequence `x₁…x_m` to
//! `W₂ · ReLU(W₁(W_O · concat(head₁…head_H) + x_m))`, where head `h` is the
//! leftmost token maximizing `⟨K⁽ʰ⁾xᵢ, Q⁽ʰ⁾x_m⟩`. A decoder appends each output
//! to the sequence and applies the layer again.
//!
//! Machines are generic over [`Scalar`]: exact rationals or `f64`. Under
//! `f64`, attention scores within [`TieRule::tolerance`] of the maximum count
//! as tied unless [`TieRule::exact`] is set.
//!
//! # JSON
//!
//! ```text
//! {"backend": "rational" | "float", "sigma_sizes": [..], "out_size": k,
//!  "d": d, "heads": H, "iterations": t, "tie_tolerance": 1e-9, "exact_ties": false,
//!  "layer": {"q": [M..], "k": [M..], "w_o": M, "w1": M, "w2": M},
//!  "encoding": {"assignments": [[v..]..], "eol": [v..]},
//!  "output_map": {"argmax_lookup": {"start": s, "lookup": [..]}}
//!              | {"read_coordinate": {"index": i, "base": b}}}
//! ```
//!
//! A matrix `M` is `{"rows", "cols", "entries": [[i, j, v], ..]}` listing
//! non-zero entries in row-major order (a dense row-major `"data"` list is
//! also accepted). Rational values are strings `"p/q"` (or `"p"`), float
//! values are JSON numbers. Assignment vectors are listed by canonical index.

mod comp;
mod layer;
mod machine;
mod matrix;
mod scalar;

pub use comp::build_comp_decoder;
pub use layer::{AttentionLayer, LayerStep};
pub use machine::{AnyMachine, DecoderMachine, DecoderTrace, OutputMap, PositionalEncoding, READ_TOLERANCE};
pub use matrix::Matrix;
pub use scalar::{leftmost_max, Scalar, TieRule};

pub(crate) use layer::dot;

use crate::domain::Word;
use crate::error::Result;

/// Scores of head `h` over `seq` against its last element.
pub fn attention_scores<S: Scalar>(layer: &AttentionLayer<S>, h: usize, seq: &[Vec<S>]) -> Result<Vec<S>> {
    layer.attention_scores(h, seq)
}

pub fn layer_apply<S: Scalar>(layer: &AttentionLayer<S>, seq: &[Vec<S>]) -> Result<Vec<S>> {
    layer.apply(seq, TieRule::default())
}

pub fn decoder_run<S: Scalar>(machine: &DecoderMachine<S>, w: &Word, t: usize) -> Result<DecoderTrace<S>> {
    machine.run(w, t)
}

pub fn decoder_compute<S: Scalar>(machine: &DecoderMachine<S>, w: &Word) -> Result<usize> {
    machine.compute(w)
}
