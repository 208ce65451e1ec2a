use std::collections::BTreeMap;

use super::{AQuery, DecisionTree, HQuery, Node};
use crate::domain::{Assignment, Domain};
use crate::error::{Error, Result};

/// Depth-`t` tree for `comp^t_n` that guesses `f(p)` letter by letter at the
/// current pointer `p`; every a-query returns `(p, f(p))`.
pub fn comp_tree(n: usize, t: usize) -> Result<DecisionTree> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let domain = Domain::new(vec![n; n], n)?;
    let root = comp_node(&domain, n, 0, t)?;
    DecisionTree::new(domain, 1, root)
}

fn comp_node(domain: &Domain, n: usize, pointer: usize, left: usize) -> Result<Node> {
    if left == 0 {
        return Ok(Node::Leaf(pointer));
    }
    let prefix: Vec<usize> = (0..n)
        .map(|s| domain.assignment_index(Assignment::new(pointer, s)))
        .collect();
    let query = HQuery::single(AQuery::with_prefix(domain, &prefix)?);
    let mut children = BTreeMap::new();
    for (s, &a) in prefix.iter().enumerate() {
        children.insert(vec![a], comp_node(domain, n, s, left - 1)?);
    }
    Ok(Node::Internal { query, children })
}

/// Depth-`k` tree for `one^k_n`: after the `c`-th one is found at position
/// `i`, ask `(i+1,1),…,(n,1),(1,0),…,(n,0),(1,1),…,(i,1)`.
pub fn one_tree(n: usize, k: usize) -> Result<DecisionTree> {
    if n == 0 || k == 0 {
        return Err(Error::invalid("n and k must be positive"));
    }
    let domain = Domain::binary(n, n + 1)?;
    let root = one_node(&domain, n, k, 0, 0)?;
    DecisionTree::new(domain, 1, root)
}

fn one_node(domain: &Domain, n: usize, k: usize, start: usize, found: usize) -> Result<Node> {
    // no positions left: fewer than k ones
    if start == n {
        return Ok(Node::Leaf(n));
    }
    let ones: Vec<usize> = (start..n)
        .map(|p| domain.assignment_index(Assignment::new(p, 1)))
        .collect();
    let zeros: Vec<usize> = (0..n)
        .map(|p| domain.assignment_index(Assignment::new(p, 0)))
        .collect();
    let prefix: Vec<usize> = ones.iter().chain(&zeros).copied().collect();
    let query = HQuery::single(AQuery::with_prefix(domain, &prefix)?);
    let mut children = BTreeMap::new();
    for (offset, &a) in ones.iter().enumerate() {
        let p = start + offset;
        let child = if found + 1 == k {
            Node::Leaf(p)
        } else {
            one_node(domain, n, k, p + 1, found + 1)?
        };
        children.insert(vec![a], child);
    }
    for &a in &zeros {
        children.insert(vec![a], Node::Leaf(n));
    }
    Ok(Node::Internal { query, children })
}
