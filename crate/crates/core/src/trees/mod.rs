//! Decision trees over (H-degree) assignment queries, Boolean coordinate
//! trees, YES-NO trees and the conversions between them.
//!
//! Children are stored sparsely by answer key; a key may be absent only if no
//! word of the domain can reach it. Evaluation reports a missing reachable key
//! as [`Error::MalformedTree`].

mod boolean;
mod families;
mod query;
mod random;
mod yesno;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, FunctionTable, Word};
use crate::error::{Error, Result};

pub use boolean::{BooleanDecisionTree, BooleanNode};
pub use families::{comp_tree, one_tree};
pub use query::{key_from_str, key_to_string, AQuery, HQuery};
pub use random::{random_boolean_tree, random_tree, random_yesno_tree};
pub use yesno::{YesNoNode, YesNoTree};

/// Answer tuple of an H-degree query, as canonical assignment indices.
pub type AnswerKey = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Leaf(usize),
    Internal {
        query: HQuery,
        children: BTreeMap<AnswerKey, Node>,
    },
}

impl Node {
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Internal { children, .. } => {
                1 + children.values().map(Node::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Internal { children, .. } => 1 + children.values().map(Node::node_count).sum::<usize>(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionTree {
    domain: Domain,
    heads: usize,
    root: Node,
}

impl DecisionTree {
    pub fn new(domain: Domain, heads: usize, root: Node) -> Result<Self> {
        if heads == 0 {
            return Err(Error::invalid("trees need at least one head"));
        }
        validate(&domain, heads, &root)?;
        Ok(DecisionTree { domain, heads, root })
    }

    pub fn leaf(domain: Domain, heads: usize, output: usize) -> Result<Self> {
        DecisionTree::new(domain, heads, Node::Leaf(output))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn eval(&self, w: &Word) -> Result<usize> {
        self.domain.check_word(w)?;
        let mut node = &self.root;
        let mut path: Vec<String> = Vec::new();
        loop {
            match node {
                Node::Leaf(o) => return Ok(*o),
                Node::Internal { query, children } => {
                    let key = query.eval(&self.domain, w);
                    match children.get(&key) {
                        Some(child) => {
                            path.push(key_to_string(&self.domain, &key));
                            node = child;
                        }
                        None => {
                            return Err(Error::MalformedTree {
                                node: node_name(&path),
                                key: key_to_string(&self.domain, &key),
                            })
                        }
                    }
                }
            }
        }
    }

    /// Evaluates on every word of the domain.
    pub fn to_table(&self, budget: usize) -> Result<FunctionTable> {
        FunctionTable::try_from_fn(self.domain.clone(), budget, |w| self.eval(w))
    }

    /// Exhaustive equality with a table over the same input domain.
    pub fn computes(&self, f: &FunctionTable, budget: usize) -> Result<bool> {
        if f.domain().sigma_sizes() != self.domain.sigma_sizes() {
            return Err(Error::invalid("tree and table have different input domains"));
        }
        self.domain.word_count_within(budget)?;
        for w in self.domain.words() {
            if self.eval(&w)? != f.eval(&w) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn node_name(path: &[String]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        format!("root/{}", path.join("/"))
    }
}

fn validate(domain: &Domain, heads: usize, node: &Node) -> Result<()> {
    match node {
        Node::Leaf(o) => {
            if *o >= domain.out_size() {
                return Err(Error::invalid(format!(
                    "leaf output {o} outside output alphabet of size {}",
                    domain.out_size()
                )));
            }
        }
        Node::Internal { query, children } => {
            if query.heads() != heads {
                return Err(Error::invalid(format!(
                    "query with {} parts in a {heads}-head tree",
                    query.heads()
                )));
            }
            if query.parts()[0].len() != domain.num_assignments() {
                return Err(Error::invalid("query does not range over the domain's assignments"));
            }
            for (key, child) in children {
                if key.len() != heads || key.iter().any(|&a| a >= domain.num_assignments()) {
                    return Err(Error::invalid(format!("bad child key {key:?}")));
                }
                validate(domain, heads, child)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeRepr {
    Leaf {
        leaf: usize,
    },
    Internal {
        query: Vec<Vec<usize>>,
        children: BTreeMap<String, NodeRepr>,
    },
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    sigma_sizes: Vec<usize>,
    out_size: usize,
    heads: usize,
    #[serde(default, skip_deserializing)]
    depth: usize,
    root: NodeRepr,
}

fn node_to_repr(domain: &Domain, node: &Node) -> NodeRepr {
    match node {
        Node::Leaf(o) => NodeRepr::Leaf { leaf: *o },
        Node::Internal { query, children } => NodeRepr::Internal {
            query: query.parts().iter().map(|q| q.order().to_vec()).collect(),
            children: children
                .iter()
                .map(|(k, c)| (key_to_string(domain, k), node_to_repr(domain, c)))
                .collect(),
        },
    }
}

fn node_from_repr(domain: &Domain, repr: NodeRepr) -> Result<Node> {
    Ok(match repr {
        NodeRepr::Leaf { leaf } => Node::Leaf(leaf),
        NodeRepr::Internal { query, children } => {
            let parts = query
                .into_iter()
                .map(|order| AQuery::new(domain, order))
                .collect::<Result<Vec<_>>>()?;
            let mut map = BTreeMap::new();
            for (k, c) in children {
                let key = key_from_str(domain, &k)?;
                if map.insert(key, node_from_repr(domain, c)?).is_some() {
                    return Err(Error::Parse(format!("duplicate child key {k:?}")));
                }
            }
            Node::Internal {
                query: HQuery::new(parts)?,
                children: map,
            }
        }
    })
}

impl Serialize for DecisionTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TreeRepr {
            sigma_sizes: self.domain.sigma_sizes().to_vec(),
            out_size: self.domain.out_size(),
            heads: self.heads,
            depth: self.depth(),
            root: node_to_repr(&self.domain, &self.root),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DecisionTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = TreeRepr::deserialize(d)?;
        let build = || -> Result<DecisionTree> {
            let domain = Domain::new(repr.sigma_sizes, repr.out_size)?;
            let root = node_from_repr(&domain, repr.root)?;
            DecisionTree::new(domain, repr.heads, root)
        };
        build().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_comp_table, build_one_table, Assignment, DEFAULT_BUDGET};

    #[test]
    fn leaf_tree_is_constant() {
        let d = Domain::new(vec![3, 2], 4).unwrap();
        let t = DecisionTree::leaf(d.clone(), 1, 3).unwrap();
        assert_eq!(t.depth(), 0);
        for w in d.words() {
            assert_eq!(t.eval(&w).unwrap(), 3);
        }
        assert!(DecisionTree::leaf(d, 1, 4).is_err());
    }

    #[test]
    fn family_trees_match_tables() {
        for n in 1..=10 {
            for k in 1..=3 {
                let t = one_tree(n, k).unwrap();
                assert!(t.depth() <= k);
                let f = build_one_table(n, k, DEFAULT_BUDGET).unwrap();
                assert!(t.computes(&f, DEFAULT_BUDGET).unwrap(), "one^{k}_{n}");
            }
        }
        for n in 1..=6 {
            for t in 1..=3 {
                let tree = comp_tree(n, t).unwrap();
                assert_eq!(tree.depth(), t);
                let f = build_comp_table(n, t, DEFAULT_BUDGET).unwrap();
                assert!(tree.computes(&f, DEFAULT_BUDGET).unwrap(), "comp^{t}_{n}");
            }
        }
    }

    #[test]
    fn missing_reachable_child_is_reported() {
        let d = Domain::binary(2, 2).unwrap();
        let q = HQuery::single(AQuery::canonical(&d));
        let mut children = BTreeMap::new();
        children.insert(vec![d.assignment_index(Assignment::new(0, 0))], Node::Leaf(0));
        let t = DecisionTree::new(d, 1, Node::Internal { query: q, children }).unwrap();
        assert_eq!(t.eval(&Word::from_bits("00").unwrap()).unwrap(), 0);
        let err = t.eval(&Word::from_bits("10").unwrap()).unwrap_err();
        assert_eq!(
            err,
            Error::MalformedTree {
                node: "root".into(),
                key: "1:1".into()
            }
        );
    }

    #[test]
    fn json_format() {
        let d = Domain::binary(1, 2).unwrap();
        let q = HQuery::single(AQuery::new(&d, vec![1, 0]).unwrap());
        let mut children = BTreeMap::new();
        children.insert(vec![0], Node::Leaf(0));
        children.insert(vec![1], Node::Leaf(1));
        let t = DecisionTree::new(d, 1, Node::Internal { query: q, children }).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(
            s,
            r#"{"sigma_sizes":[2],"out_size":2,"heads":1,"depth":1,"root":{"query":[[1,0]],"children":{"1:0":{"leaf":0},"1:1":{"leaf":1}}}}"#
        );
        let back: DecisionTree = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        let bad = s.replace("[[1,0]]", "[[1,1]]");
        assert!(serde_json::from_str::<DecisionTree>(&bad).is_err());
    }

    #[test]
    fn json_round_trip_of_random_trees() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for heads in 1..=2 {
            let d = Domain::new(vec![2, 3, 2], 3).unwrap();
            let t = random_tree(&d, heads, 3, &mut rng).unwrap();
            let s = serde_json::to_string(&t).unwrap();
            let back: DecisionTree = serde_json::from_str(&s).unwrap();
            assert_eq!(back, t);
        }
    }
}
