use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{AQuery, BooleanDecisionTree, BooleanNode, DecisionTree, HQuery, Node, YesNoNode, YesNoTree};
use crate::domain::{Assignment, Domain, Word, DEFAULT_BUDGET};
use crate::error::Result;

const STOP_PROBABILITY: f64 = 0.25;

/// Random tree of depth at most `max_depth` with uniformly random query
/// orders and leaf outputs. Children exist exactly for the answer tuples some
/// word can reach, so the domain must be enumerable within the default budget.
pub fn random_tree<R: Rng + ?Sized>(
    domain: &Domain,
    heads: usize,
    max_depth: usize,
    rng: &mut R,
) -> Result<DecisionTree> {
    let words = domain.words_within(DEFAULT_BUDGET)?;
    let refs: Vec<&Word> = words.iter().collect();
    let root = random_node(domain, heads, max_depth, &refs, rng);
    DecisionTree::new(domain.clone(), heads, root)
}

fn random_node<R: Rng + ?Sized>(
    domain: &Domain,
    heads: usize,
    left: usize,
    words: &[&Word],
    rng: &mut R,
) -> Node {
    if left == 0 || rng.gen_bool(STOP_PROBABILITY) {
        return Node::Leaf(rng.gen_range(0..domain.out_size()));
    }
    let parts = (0..heads)
        .map(|_| {
            let mut order: Vec<usize> = (0..domain.num_assignments()).collect();
            order.shuffle(rng);
            AQuery::new(domain, order).expect("shuffled indices form a permutation")
        })
        .collect();
    let query = HQuery::new(parts).expect("heads >= 1");
    let mut groups: BTreeMap<Vec<usize>, Vec<&Word>> = BTreeMap::new();
    for &w in words {
        groups.entry(query.eval(domain, w)).or_default().push(w);
    }
    let children = groups
        .into_iter()
        .map(|(key, ws)| (key, random_node(domain, heads, left - 1, &ws, rng)))
        .collect();
    Node::Internal { query, children }
}

/// Random binary-output Boolean tree; positions may repeat along a path.
pub fn random_boolean_tree<R: Rng + ?Sized>(n: usize, max_depth: usize, rng: &mut R) -> BooleanDecisionTree {
    fn node<R: Rng + ?Sized>(n: usize, left: usize, rng: &mut R) -> BooleanNode {
        if left == 0 || rng.gen_bool(STOP_PROBABILITY) {
            return BooleanNode::Leaf(rng.gen_range(0..2));
        }
        let p = rng.gen_range(0..n);
        let zero = node(n, left - 1, rng);
        let one = node(n, left - 1, rng);
        BooleanNode::query(p, zero, one)
    }
    BooleanDecisionTree::new(n, 2, node(n, max_depth, rng)).expect("positions drawn in range")
}

pub fn random_yesno_tree<R: Rng + ?Sized>(domain: &Domain, max_depth: usize, rng: &mut R) -> YesNoTree {
    fn node<R: Rng + ?Sized>(domain: &Domain, left: usize, rng: &mut R) -> YesNoNode {
        if left == 0 || rng.gen_bool(STOP_PROBABILITY) {
            return YesNoNode::Leaf(rng.gen_range(0..domain.out_size()));
        }
        let p = rng.gen_range(0..domain.n());
        let a = Assignment::new(p, rng.gen_range(0..domain.sigma_size(p)));
        let yes = node(domain, left - 1, rng);
        let no = node(domain, left - 1, rng);
        YesNoNode::question(a, yes, no)
    }
    YesNoTree::new(domain.clone(), node(domain, max_depth, rng)).expect("assignments drawn in range")
}
