//! Compilation of a-query trees into decoders, and extraction of a-query trees
//! from decoders.
//!
//! [`compile_tree`] builds an exact rational machine whose `t`-th output is
//! the one-hot encoding of the node the tree reaches after `t` queries.
//! [`extract_tree`] reads the assignment orders a machine induces at each
//! reachable state and rebuilds a depth-`t` tree with the same behavior.

mod extract;
mod layout;

pub use extract::{extract_tree, extract_tree_within};
pub use layout::CompiledLayout;

use num_rational::BigRational;

use crate::decoder::{AttentionLayer, DecoderMachine, Matrix, OutputMap, PositionalEncoding, Scalar};
use crate::error::Result;
use crate::trees::DecisionTree;

/// Exact machine with `H` heads computing `tree` in `max(depth, 1)`
/// iterations. Leaves hold their output coordinate, so shallow branches and
/// constant trees keep their answer until the last iteration.
pub fn compile_tree(tree: &DecisionTree) -> Result<DecoderMachine<BigRational>> {
    Ok(compile_with_layout(tree)?.0)
}

pub fn compile_with_layout(tree: &DecisionTree) -> Result<(DecoderMachine<BigRational>, CompiledLayout)> {
    type R = BigRational;
    let layout = CompiledLayout::of(tree);
    let domain = tree.domain();
    let (d, heads, na) = (layout.d, layout.heads, layout.num_assignments);
    let one = R::one;

    let mut assignments = vec![vec![R::zero(); d]; na];
    for (a, p) in assignments.iter_mut().enumerate() {
        p[layout.assignment(a, 0)] = one();
        p[layout.special] = one();
        for (j, &v) in layout.nonleaf.iter().enumerate() {
            for h in 0..heads {
                let rank = layout.nodes[v].query.as_ref().expect("non-leaf").parts()[h].rank_of(a);
                p[layout.positional(j, h)] = R::from_ratio(1, rank as i64 + 1);
            }
        }
    }
    let mut eol = vec![R::zero(); d];
    eol[layout.output(0)] = one();

    let mut q = vec![Matrix::zeros(d, d); heads];
    for (v, node) in layout.nodes.iter().enumerate() {
        for (h, qh) in q.iter_mut().enumerate() {
            match node.nonleaf_index {
                Some(j) => qh.set(layout.positional(j, h), layout.output(v), one()),
                None => qh.set(layout.output(v), layout.output(v), one()),
            }
        }
    }
    let k = vec![Matrix::identity(d); heads];

    let mut w_o = Matrix::zeros(d, d * heads);
    for h in 0..heads {
        for a in 0..na {
            w_o.set(layout.assignment(a, h), h * d + layout.assignment(a, 0), one());
        }
    }
    w_o.set(layout.special, layout.special, one());

    let mut w1 = Matrix::zeros(d, d);
    let minus_h = R::from_ratio(-(heads as i64), 1);
    for (v, node) in layout.nodes.iter().enumerate() {
        let row = layout.output(v);
        if let Some((parent, key)) = &node.parent {
            w1.add_to(row, layout.output(*parent), one());
            for (h, &a) in key.iter().enumerate() {
                w1.add_to(row, layout.assignment(a, h), one());
            }
            w1.add_to(row, layout.special, minus_h.clone());
        }
        if node.nonleaf_index.is_none() {
            w1.add_to(row, row, one());
        }
    }
    let w2 = Matrix::identity(d);

    let layer = AttentionLayer::new(q, k, w_o, w1, w2)?;
    let output_map = OutputMap::ArgmaxLookup {
        start: layout.output(0),
        lookup: layout.nodes.iter().map(|n| n.leaf_output.unwrap_or(0)).collect(),
    };
    let iterations = tree.depth().max(1);
    let machine = DecoderMachine::new(
        domain.clone(),
        layer,
        PositionalEncoding { assignments, eol },
        output_map,
        iterations,
    )?;
    Ok((machine, layout))
}
