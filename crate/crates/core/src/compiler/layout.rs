use serde::Serialize;

use crate::trees::{AnswerKey, DecisionTree, HQuery, Node};

/// Coordinate layout of a compiled machine.
///
/// Coordinates are laid out as positional `(non-leaf, head)`, then output
/// (one per node), then assignment `(assignment, head)`, then the special
/// coordinate. Nodes are numbered in preorder with the root at 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompiledLayout {
    pub heads: usize,
    pub num_assignments: usize,
    pub output_base: usize,
    pub assignment_base: usize,
    pub special: usize,
    pub d: usize,
    /// Node ids of the non-leaf nodes, in preorder.
    pub nonleaf: Vec<usize>,
    #[serde(skip)]
    pub(crate) nodes: Vec<NodeInfo>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct NodeInfo {
    pub parent: Option<(usize, AnswerKey)>,
    pub nonleaf_index: Option<usize>,
    pub query: Option<HQuery>,
    pub leaf_output: Option<usize>,
}

impl CompiledLayout {
    pub fn of(tree: &DecisionTree) -> Self {
        let mut nodes = Vec::with_capacity(tree.node_count());
        let mut nonleaf = Vec::new();
        collect(tree.root(), None, &mut nodes, &mut nonleaf);
        let heads = tree.heads();
        let num_assignments = tree.domain().num_assignments();
        let output_base = nonleaf.len() * heads;
        let assignment_base = output_base + nodes.len();
        let special = assignment_base + num_assignments * heads;
        CompiledLayout {
            heads,
            num_assignments,
            output_base,
            assignment_base,
            special,
            d: special + 1,
            nonleaf,
            nodes,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Coordinate holding `1/rank` of an assignment in head `h`'s order at
    /// the `j`-th non-leaf node.
    pub fn positional(&self, j: usize, h: usize) -> usize {
        j * self.heads + h
    }

    pub fn output(&self, node: usize) -> usize {
        self.output_base + node
    }

    pub fn assignment(&self, a: usize, h: usize) -> usize {
        self.assignment_base + h * self.num_assignments + a
    }

    pub fn is_output(&self, coordinate: usize) -> bool {
        (self.output_base..self.assignment_base).contains(&coordinate)
    }
}

fn collect(node: &Node, parent: Option<(usize, AnswerKey)>, nodes: &mut Vec<NodeInfo>, nonleaf: &mut Vec<usize>) {
    let id = nodes.len();
    match node {
        Node::Leaf(o) => nodes.push(NodeInfo {
            parent,
            nonleaf_index: None,
            query: None,
            leaf_output: Some(*o),
        }),
        Node::Internal { query, children } => {
            nodes.push(NodeInfo {
                parent,
                nonleaf_index: Some(nonleaf.len()),
                query: Some(query.clone()),
                leaf_output: None,
            });
            nonleaf.push(id);
            for (key, child) in children {
                collect(child, Some((id, key.clone())), nodes, nonleaf);
            }
        }
    }
}
