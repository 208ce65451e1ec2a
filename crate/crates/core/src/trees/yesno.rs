use std::collections::BTreeMap;

use super::{AQuery, BooleanDecisionTree, BooleanNode, DecisionTree, HQuery, Node};
use crate::domain::{Assignment, Domain, Restriction, Word};
use crate::error::{Error, Result};

/// Node of a tree asking "is `w` consistent with assignment `a`?".
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum YesNoNode {
    Leaf(usize),
    Question {
        assignment: Assignment,
        yes: Box<YesNoNode>,
        no: Box<YesNoNode>,
    },
}

impl YesNoNode {
    pub fn question(assignment: Assignment, yes: YesNoNode, no: YesNoNode) -> Self {
        YesNoNode::Question {
            assignment,
            yes: Box::new(yes),
            no: Box::new(no),
        }
    }

    /// Largest number of YES edges on a root-to-leaf path.
    pub fn yes_depth(&self) -> usize {
        match self {
            YesNoNode::Leaf(_) => 0,
            YesNoNode::Question { yes, no, .. } => (yes.yes_depth() + 1).max(no.yes_depth()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            YesNoNode::Leaf(_) => 0,
            YesNoNode::Question { yes, no, .. } => 1 + yes.depth().max(no.depth()),
        }
    }

    pub fn question_count(&self) -> usize {
        match self {
            YesNoNode::Leaf(_) => 0,
            YesNoNode::Question { yes, no, .. } => 1 + yes.question_count() + no.question_count(),
        }
    }

    fn eval(&self, w: &Word) -> usize {
        let mut node = self;
        loop {
            match node {
                YesNoNode::Leaf(o) => return *o,
                YesNoNode::Question { assignment, yes, no } => {
                    node = if assignment.consistent(w) { yes } else { no };
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YesNoTree {
    domain: Domain,
    root: YesNoNode,
}

impl YesNoTree {
    pub fn new(domain: Domain, root: YesNoNode) -> Result<Self> {
        fn check(domain: &Domain, node: &YesNoNode) -> Result<()> {
            match node {
                YesNoNode::Leaf(o) if *o >= domain.out_size() => {
                    Err(Error::invalid(format!("leaf output {o} outside alphabet")))
                }
                YesNoNode::Leaf(_) => Ok(()),
                YesNoNode::Question { assignment, yes, no } => {
                    domain.check_assignment(*assignment)?;
                    check(domain, yes)?;
                    check(domain, no)
                }
            }
        }
        check(&domain, &root)?;
        Ok(YesNoTree { domain, root })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn root(&self) -> &YesNoNode {
        &self.root
    }

    pub fn yes_depth(&self) -> usize {
        self.root.yes_depth()
    }

    pub fn eval(&self, w: &Word) -> Result<usize> {
        self.domain.check_word(w)?;
        Ok(self.root.eval(w))
    }

    /// Simulates each a-query by asking its assignments in order until one
    /// gets a YES, so every a-query costs one YES edge. Questions whose answer
    /// is already forced are not asked.
    pub fn from_aquery_tree(tree: &DecisionTree) -> Result<YesNoTree> {
        if tree.heads() != 1 {
            return Err(Error::invalid("YES-NO simulation needs a single-head tree"));
        }
        let domain = tree.domain().clone();
        let state = Restriction::full(&domain)?;
        let mut path = Vec::new();
        let root = simulate(&domain, tree.root(), &state, &mut path)?;
        Ok(YesNoTree { domain, root })
    }

    /// Relabels each question `(i, σ)` as a query of position `i`.
    pub fn to_boolean(&self) -> Result<BooleanDecisionTree> {
        if !self.domain.is_binary() {
            return Err(Error::UnsupportedDomain(
                "Boolean trees need every position alphabet to be {0,1}".into(),
            ));
        }
        fn relabel(node: &YesNoNode) -> BooleanNode {
            match node {
                YesNoNode::Leaf(o) => BooleanNode::Leaf(*o),
                YesNoNode::Question { assignment, yes, no } => {
                    let (y, n) = (relabel(yes), relabel(no));
                    if assignment.letter == 1 {
                        BooleanNode::query(assignment.position, n, y)
                    } else {
                        BooleanNode::query(assignment.position, y, n)
                    }
                }
            }
        }
        BooleanDecisionTree::new(self.domain.n(), self.domain.out_size(), relabel(&self.root))
    }

    /// Single-head a-query tree of depth at most [`yes_depth`](Self::yes_depth).
    ///
    /// Each node's a-query lists the questions of its NO-chain; the answer
    /// names the first YES on the chain, and any other answer means the chain
    /// ran to its end.
    pub fn to_aquery(&self) -> Result<DecisionTree> {
        let state = Restriction::full(&self.domain)?;
        let root = no_chain(&self.domain, &self.root, &state);
        DecisionTree::new(self.domain.clone(), 1, root)
    }
}

fn simulate(domain: &Domain, node: &Node, state: &Restriction, path: &mut Vec<String>) -> Result<YesNoNode> {
    let (query, children) = match node {
        Node::Leaf(o) => return Ok(YesNoNode::Leaf(*o)),
        Node::Internal { query, children } => (&query.parts()[0], children),
    };
    let mut rest = state.clone();
    let mut asked: Vec<(Assignment, YesNoNode)> = Vec::new();
    let mut tail = None;
    for &a in query.order() {
        let asg = domain.assignment(a);
        if !rest.allows(asg) {
            continue;
        }
        let child = children.get(&vec![a]).ok_or_else(|| Error::MalformedTree {
            node: path_name(path),
            key: super::key_to_string(domain, &[a]),
        })?;
        path.push(super::key_to_string(domain, &[a]));
        let sub = simulate(domain, child, &rest.with_yes(asg), path)?;
        path.pop();
        if rest.forces(asg) {
            tail = Some(sub);
            break;
        }
        asked.push((asg, sub));
        rest = rest.with_no(asg);
    }
    let mut node = tail.expect("a non-empty state forces some assignment");
    for (asg, yes) in asked.into_iter().rev() {
        node = YesNoNode::question(asg, yes, node);
    }
    Ok(node)
}

fn path_name(path: &[String]) -> String {
    if path.is_empty() {
        "root".into()
    } else {
        format!("root/{}", path.join("/"))
    }
}

pub(crate) fn no_chain(domain: &Domain, node: &YesNoNode, state: &Restriction) -> Node {
    let mut prefix = Vec::new();
    let mut exits = Vec::new();
    let mut rest = state.clone();
    let mut u = node;
    while let YesNoNode::Question { assignment, yes, no } = u {
        if !rest.is_empty() && rest.allows(*assignment) {
            let a = domain.assignment_index(*assignment);
            prefix.push(a);
            exits.push((a, yes.as_ref(), rest.with_yes(*assignment)));
            rest = rest.with_no(*assignment);
        }
        u = no;
    }
    let end = match u {
        YesNoNode::Leaf(o) => *o,
        YesNoNode::Question { .. } => unreachable!(),
    };
    if prefix.is_empty() {
        return Node::Leaf(end);
    }
    let query = AQuery::with_prefix(domain, &prefix).expect("chain assignments are distinct");
    let mut children = BTreeMap::new();
    for &a in query.order() {
        children.insert(vec![a], Node::Leaf(end));
    }
    for (a, yes, sub) in exits {
        children.insert(vec![a], no_chain(domain, yes, &sub));
    }
    Node::Internal {
        query: HQuery::single(query),
        children,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DEFAULT_BUDGET;
    use crate::trees::{one_tree, random_tree, random_yesno_tree};
    use rand::SeedableRng;

    #[test]
    fn yes_depth_examples() {
        assert_eq!(YesNoNode::Leaf(0).yes_depth(), 0);
        let q = YesNoNode::question(Assignment::new(0, 1), YesNoNode::Leaf(1), YesNoNode::Leaf(0));
        assert_eq!(q.yes_depth(), 1);
        let mut chain = YesNoNode::Leaf(0);
        for p in 0..5 {
            chain = YesNoNode::question(Assignment::new(p, 1), YesNoNode::Leaf(1), chain);
        }
        assert_eq!(chain.yes_depth(), 1);
        assert_eq!(chain.question_count(), 5);
    }

    #[test]
    fn depth_zero_tree_simulates_to_leaf() {
        let t = DecisionTree::leaf(Domain::binary(3, 2).unwrap(), 1, 1).unwrap();
        let y = YesNoTree::from_aquery_tree(&t).unwrap();
        assert_eq!(y.root(), &YesNoNode::Leaf(1));
        assert_eq!(y.yes_depth(), 0);
    }

    #[test]
    fn first_one_becomes_three_questions() {
        let t = one_tree(3, 1).unwrap();
        let y = YesNoTree::from_aquery_tree(&t).unwrap();
        assert_eq!(y.root().question_count(), 3);
        assert_eq!(y.yes_depth(), 1);
        for w in t.domain().words() {
            assert_eq!(y.eval(&w).unwrap(), t.eval(&w).unwrap());
        }
    }

    #[test]
    fn one_two_six_has_yes_depth_two() {
        let t = one_tree(6, 2).unwrap();
        let y = YesNoTree::from_aquery_tree(&t).unwrap();
        assert_eq!(y.yes_depth(), 2);
        let f = crate::domain::build_one_table(6, 2, DEFAULT_BUDGET).unwrap();
        for w in t.domain().words() {
            assert_eq!(y.eval(&w).unwrap(), f.eval(&w));
        }
    }

    #[test]
    fn single_question_relabels_to_rank_one() {
        let d = Domain::binary(3, 2).unwrap();
        let y = YesNoTree::new(
            d,
            YesNoNode::question(Assignment::new(1, 1), YesNoNode::Leaf(1), YesNoNode::Leaf(0)),
        )
        .unwrap();
        let b = y.to_boolean().unwrap();
        assert_eq!(b.rank(), 1);
        assert_eq!(b.root(), &BooleanNode::query(1, BooleanNode::Leaf(0), BooleanNode::Leaf(1)));
        let leaf = YesNoTree::new(Domain::binary(2, 2).unwrap(), YesNoNode::Leaf(0)).unwrap();
        assert_eq!(leaf.to_boolean().unwrap().root(), &BooleanNode::Leaf(0));
    }

    #[test]
    fn non_binary_domains_are_rejected() {
        let y = YesNoTree::new(Domain::new(vec![3], 2).unwrap(), YesNoNode::Leaf(0)).unwrap();
        assert!(matches!(y.to_boolean(), Err(Error::UnsupportedDomain(_))));
    }

    #[test]
    fn missing_reachable_child_is_reported() {
        let d = Domain::binary(2, 2).unwrap();
        let mut children = BTreeMap::new();
        children.insert(vec![0], Node::Leaf(0));
        let t = DecisionTree::new(
            d,
            1,
            Node::Internal {
                query: HQuery::single(AQuery::canonical(&Domain::binary(2, 2).unwrap())),
                children,
            },
        )
        .unwrap();
        let err = YesNoTree::from_aquery_tree(&t).unwrap_err();
        assert!(matches!(err, Error::MalformedTree { .. }));
    }

    #[test]
    fn composite_rank_bound_on_random_trees() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for i in 0..100 {
            let n = 1 + i % 6;
            let d = Domain::binary(n, 2).unwrap();
            let t = random_tree(&d, 1, 3, &mut rng).unwrap();
            let y = YesNoTree::from_aquery_tree(&t).unwrap();
            assert!(y.yes_depth() <= t.depth());
            let b = y.to_boolean().unwrap();
            assert!(b.rank() <= t.depth(), "rank {} depth {}", b.rank(), t.depth());
            for w in d.words() {
                let o = t.eval(&w).unwrap();
                assert_eq!(y.eval(&w).unwrap(), o);
                assert_eq!(b.eval(&w).unwrap(), o);
            }
        }
    }

    #[test]
    fn no_chain_conversion_respects_yes_depth() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for sizes in [vec![2, 2, 2], vec![3, 2], vec![2, 3, 1], vec![4]] {
            let d = Domain::new(sizes, 3).unwrap();
            for _ in 0..40 {
                let y = random_yesno_tree(&d, 5, &mut rng);
                let a = y.to_aquery().unwrap();
                assert!(a.depth() <= y.yes_depth());
                for w in d.words() {
                    assert_eq!(a.eval(&w).unwrap(), y.eval(&w).unwrap());
                }
            }
        }
    }

    #[test]
    fn boolean_round_trip_through_yes_no() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for n in 1..=5 {
            for _ in 0..40 {
                let b = crate::trees::random_boolean_tree(n, 5, &mut rng);
                let a = b.to_aquery_tree();
                let y = YesNoTree::from_aquery_tree(&a).unwrap();
                let back = y.to_boolean().unwrap();
                assert!(back.rank() <= y.yes_depth());
                for w in b.domain().words() {
                    assert_eq!(back.eval(&w).unwrap(), b.eval(&w).unwrap());
                }
            }
        }
    }
}
