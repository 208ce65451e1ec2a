use std::collections::BTreeMap;

use super::{AQuery, DecisionTree, HQuery, Node};
use crate::domain::{Assignment, Domain, Word};
use crate::error::{Error, Result};

/// Node of a Boolean decision tree querying single coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BooleanNode {
    Leaf(usize),
    Query {
        /// 0-based position.
        position: usize,
        zero: Box<BooleanNode>,
        one: Box<BooleanNode>,
    },
}

impl BooleanNode {
    pub fn query(position: usize, zero: BooleanNode, one: BooleanNode) -> Self {
        BooleanNode::Query {
            position,
            zero: Box::new(zero),
            one: Box::new(one),
        }
    }

    /// Ehrenfeucht–Haussler rank: 0 at leaves, `max(min(r₀,r₁)+1, max(r₀,r₁))` inside.
    pub fn rank(&self) -> usize {
        match self {
            BooleanNode::Leaf(_) => 0,
            BooleanNode::Query { zero, one, .. } => {
                let (r0, r1) = (zero.rank(), one.rank());
                (r0.min(r1) + 1).max(r0.max(r1))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BooleanNode::Leaf(_) => 0,
            BooleanNode::Query { zero, one, .. } => 1 + zero.depth().max(one.depth()),
        }
    }

    fn eval(&self, w: &Word) -> usize {
        match self {
            BooleanNode::Leaf(o) => *o,
            BooleanNode::Query { position, zero, one } => {
                if w.0[*position] == 0 {
                    zero.eval(w)
                } else {
                    one.eval(w)
                }
            }
        }
    }

    /// Drops queries to positions already fixed higher up on the path.
    fn normalized(&self, known: &mut Vec<Option<usize>>) -> BooleanNode {
        match self {
            BooleanNode::Leaf(o) => BooleanNode::Leaf(*o),
            BooleanNode::Query { position, zero, one } => match known[*position] {
                Some(0) => zero.normalized(known),
                Some(_) => one.normalized(known),
                None => {
                    known[*position] = Some(0);
                    let z = zero.normalized(known);
                    known[*position] = Some(1);
                    let o = one.normalized(known);
                    known[*position] = None;
                    BooleanNode::query(*position, z, o)
                }
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanDecisionTree {
    n: usize,
    out_size: usize,
    root: BooleanNode,
}

impl BooleanDecisionTree {
    pub fn new(n: usize, out_size: usize, root: BooleanNode) -> Result<Self> {
        fn check(node: &BooleanNode, n: usize, out_size: usize) -> Result<()> {
            match node {
                BooleanNode::Leaf(o) if *o >= out_size => {
                    Err(Error::invalid(format!("leaf output {o} outside alphabet")))
                }
                BooleanNode::Leaf(_) => Ok(()),
                BooleanNode::Query { position, zero, one } => {
                    if *position >= n {
                        return Err(Error::invalid(format!("position {} out of range", position + 1)));
                    }
                    check(zero, n, out_size)?;
                    check(one, n, out_size)
                }
            }
        }
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        check(&root, n, out_size)?;
        Ok(BooleanDecisionTree { n, out_size, root })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Domain {
        Domain::binary(self.n, self.out_size).expect("validated on construction")
    }

    pub fn root(&self) -> &BooleanNode {
        &self.root
    }

    pub fn rank(&self) -> usize {
        self.root.rank()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn eval(&self, w: &Word) -> Result<usize> {
        self.domain().check_word(w)?;
        Ok(self.root.eval(w))
    }

    /// Same function, with no position queried twice on a path. Never
    /// increases the rank.
    pub fn normalized(&self) -> BooleanDecisionTree {
        BooleanDecisionTree {
            n: self.n,
            out_size: self.out_size,
            root: self.root.normalized(&mut vec![None; self.n]),
        }
    }

    /// Single-head a-query tree of depth at most [`rank`](Self::rank)
    /// computing the same function.
    ///
    /// From a node `v`, follow elderly children down to a leaf
    /// `u₁ = v, …, u_d`; the a-query lists `(i_ℓ, 1 − b_ℓ)` for the chain's
    /// branching edges. Answering `(i_k, 1 − b_k)` leaves the chain at `u_k`
    /// towards the child of smaller rank; any other answer means the input
    /// followed the whole chain to `u_d`.
    pub fn to_aquery_tree(&self) -> DecisionTree {
        let domain = self.domain();
        let normal = self.normalized();
        let root = elderly_strategy(&domain, &normal.root);
        DecisionTree::new(domain, 1, root).expect("construction yields a valid tree")
    }
}

/// The child whose sibling has smaller rank than the parent; the 0-child on ties.
fn elderly(zero: &BooleanNode, one: &BooleanNode) -> u8 {
    if one.rank() > zero.rank() {
        1
    } else {
        0
    }
}

fn elderly_strategy(domain: &Domain, v: &BooleanNode) -> Node {
    let mut prefix = Vec::new();
    let mut exits: Vec<(usize, &BooleanNode)> = Vec::new();
    let mut u = v;
    while let BooleanNode::Query { position, zero, one } = u {
        let (stay, leave) = if elderly(zero, one) == 0 {
            ((0usize, zero.as_ref()), one.as_ref())
        } else {
            ((1usize, one.as_ref()), zero.as_ref())
        };
        let a = domain.assignment_index(Assignment::new(*position, 1 - stay.0));
        prefix.push(a);
        exits.push((a, leave));
        u = stay.1;
    }
    let end = match u {
        BooleanNode::Leaf(o) => *o,
        BooleanNode::Query { .. } => unreachable!(),
    };
    if prefix.is_empty() {
        return Node::Leaf(end);
    }
    let query = AQuery::with_prefix(domain, &prefix).expect("positions are distinct on normalized paths");
    let mut children = BTreeMap::new();
    for &a in query.order() {
        children.insert(vec![a], Node::Leaf(end));
    }
    for (a, leave) in exits {
        children.insert(vec![a], elderly_strategy(domain, leave));
    }
    Node::Internal {
        query: HQuery::single(query),
        children,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::random_boolean_tree;
    use rand::SeedableRng;

    fn xor2() -> BooleanDecisionTree {
        let sub = |flip: usize| BooleanNode::query(1, BooleanNode::Leaf(flip), BooleanNode::Leaf(1 - flip));
        BooleanDecisionTree::new(2, 2, BooleanNode::query(0, sub(0), sub(1))).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BooleanNode::Leaf(1).rank(), 0);
        let one = BooleanNode::query(0, BooleanNode::Leaf(0), BooleanNode::Leaf(1));
        assert_eq!(one.rank(), 1);
        assert_eq!(xor2().rank(), 2);
        // a chain has rank 1 however long it is
        let chain = BooleanNode::query(
            0,
            BooleanNode::query(1, BooleanNode::query(2, BooleanNode::Leaf(0), BooleanNode::Leaf(1)), BooleanNode::Leaf(1)),
            BooleanNode::Leaf(1),
        );
        assert_eq!(chain.rank(), 1);
    }

    #[test]
    fn leaf_converts_to_leaf() {
        let t = BooleanDecisionTree::new(3, 2, BooleanNode::Leaf(1)).unwrap();
        let a = t.to_aquery_tree();
        assert_eq!(a.root(), &Node::Leaf(1));
    }

    #[test]
    fn xor_converts_to_depth_two() {
        let t = xor2();
        let a = t.to_aquery_tree();
        assert_eq!(a.depth(), 2);
        for w in t.domain().words() {
            assert_eq!(a.eval(&w).unwrap(), w.0[0] ^ w.0[1]);
        }
    }

    #[test]
    fn rank_one_chains_convert_to_depth_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        for n in 1..=8usize {
            for _ in 0..5 {
                // read-once chain: each query has one leaf child
                let mut positions: Vec<usize> = (0..n).collect();
                use rand::seq::SliceRandom;
                positions.shuffle(&mut rng);
                let mut node = BooleanNode::Leaf(rng.gen_range(0..2));
                for &p in &positions {
                    let leaf = BooleanNode::Leaf(rng.gen_range(0..2));
                    node = if rng.gen_bool(0.5) {
                        BooleanNode::query(p, node, leaf)
                    } else {
                        BooleanNode::query(p, leaf, node)
                    };
                }
                let t = BooleanDecisionTree::new(n, 2, node).unwrap();
                assert!(t.rank() <= 1);
                let a = t.to_aquery_tree();
                assert!(a.depth() <= 1);
                for w in t.domain().words() {
                    assert_eq!(a.eval(&w).unwrap(), t.eval(&w).unwrap());
                }
            }
        }
    }

    #[test]
    fn normalization_keeps_function_and_rank_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let t = random_boolean_tree(4, 5, &mut rng);
            let norm = t.normalized();
            assert!(norm.rank() <= t.rank());
            for w in t.domain().words() {
                assert_eq!(norm.eval(&w).unwrap(), t.eval(&w).unwrap());
            }
        }
    }

    #[test]
    fn conversion_preserves_function_and_depth_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 1..=5 {
            for _ in 0..60 {
                let t = random_boolean_tree(n, 6, &mut rng);
                let a = t.to_aquery_tree();
                assert!(a.depth() <= t.rank(), "depth {} rank {}", a.depth(), t.rank());
                for w in t.domain().words() {
                    assert_eq!(a.eval(&w).unwrap(), t.eval(&w).unwrap());
                }
            }
        }
    }
}
