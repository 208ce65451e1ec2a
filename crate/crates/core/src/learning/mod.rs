//! Proper learning of rank-`k` a-query trees from labelled samples.
//!
//! A sample is rank-`k` consistent if some single-head tree of depth at most
//! `k` labels it correctly. [`solve_consistency`] decides this and builds the
//! tree: it repeatedly peels off a non-empty sub-sample `S_a` of words having
//! an assignment `a` that is rank-`(k−1)` consistent, and places `a` next in
//! the root's order. [`pac_learn`] wraps the solver with a sample-size rule.

mod sample;

pub use sample::{subsample_with, Hidden, Sample, SampleSource};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Word, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::trees::{AQuery, DecisionTree, HQuery, Node};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ConsistencyResult {
    Tree { tree: DecisionTree },
    /// No tree of depth at most `k` fits the sample.
    Unsat,
    /// The sample labels `word` both ways, so no function fits it.
    Contradictory { word: Word },
}

impl ConsistencyResult {
    pub fn tree(&self) -> Option<&DecisionTree> {
        match self {
            ConsistencyResult::Tree { tree } => Some(tree),
            _ => None,
        }
    }

    pub fn is_unsat(&self) -> bool {
        !matches!(self, ConsistencyResult::Tree { .. })
    }
}

/// Single-head tree of depth at most `k` consistent with `s`, if one exists.
pub fn solve_consistency(s: &Sample, k: usize) -> Result<ConsistencyResult> {
    if let Some(w) = s.contradiction() {
        return Ok(ConsistencyResult::Contradictory { word: w.clone() });
    }
    let Some(root) = solve(s, k) else {
        return Ok(ConsistencyResult::Unsat);
    };
    let tree = DecisionTree::new(s.domain().clone(), 1, root)?;
    if tree.depth() > k || !s.is_consistent(&tree)? {
        return Err(Error::invalid("consistency solver produced an unsound tree"));
    }
    Ok(ConsistencyResult::Tree { tree })
}

fn solve(s: &Sample, k: usize) -> Option<Node> {
    if s.is_empty() {
        return Some(Node::Leaf(0));
    }
    if let Some(label) = s.constant_label() {
        return Some(Node::Leaf(label));
    }
    if k == 0 {
        return None;
    }
    let domain = s.domain();
    let mut prefix = Vec::new();
    let mut children = BTreeMap::new();
    let mut rest = s.clone();
    while !rest.is_empty() {
        // lowest canonical index among the assignments that work
        let (a, child, without) = (0..domain.num_assignments()).into_par_iter().find_map_first(|a| {
            let (with, without) = rest.split(domain.assignment(a));
            if with.is_empty() {
                return None;
            }
            solve(&with, k - 1).map(|child| (a, child, without))
        })?;
        prefix.push(a);
        children.insert(vec![a], child);
        rest = without;
    }
    for a in 0..domain.num_assignments() {
        children.entry(vec![a]).or_insert(Node::Leaf(0));
    }
    let query = HQuery::single(AQuery::with_prefix(domain, &prefix).expect("distinct assignments"));
    Some(Node::Internal { query, children })
}

/// Samples drawn by [`pac_learn`]: `⌈(|A|·k·ln|A| + |A|^k·ln 2 + ln(1/δ)) / ε⌉`.
pub fn pac_sample_size(num_assignments: usize, k: usize, epsilon: f64, delta: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("epsilon and delta must lie in (0, 1)"));
    }
    let a = num_assignments as f64;
    let log_hypotheses = a * k as f64 * a.ln() + a.powi(k as i32) * 2f64.ln();
    let m = ((log_hypotheses + (1.0 / delta).ln()) / epsilon).ceil();
    if !m.is_finite() || m > DEFAULT_BUDGET as f64 {
        return Err(Error::resource("PAC sample size", m as u128, DEFAULT_BUDGET as u128));
    }
    Ok(m as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PacOutcome {
    Hypothesis { tree: DecisionTree, samples: usize },
    /// The drawn sample admits no depth-`k` tree.
    Fail { samples: usize, certificate: ConsistencyResult },
}

pub fn pac_learn(src: &mut SampleSource, k: usize, epsilon: f64, delta: f64) -> Result<PacOutcome> {
    let m = pac_sample_size(src.domain().num_assignments(), k, epsilon, delta)?;
    let sample = src.draw_sample(m)?;
    Ok(match solve_consistency(&sample, k)? {
        ConsistencyResult::Tree { tree } => PacOutcome::Hypothesis { tree, samples: m },
        certificate => PacOutcome::Fail { samples: m, certificate },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Assignment, Budget, Domain, FunctionTable};
    use crate::rank::rank_exact_yesdepth;
    use crate::trees::random_tree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(n: usize, f: impl Fn(&Word) -> usize) -> FunctionTable {
        FunctionTable::from_fn(Domain::binary(n, 2).unwrap(), 1 << 10, f).unwrap()
    }

    fn bits(s: &str) -> Word {
        Word::from_bits(s).unwrap()
    }

    #[test]
    fn subsample_filters_and_partitions() {
        let domain = Domain::binary(2, 2).unwrap();
        let s = Sample::new(domain.clone(), vec![(bits("10"), 0), (bits("01"), 1), (bits("11"), 1)]).unwrap();
        let a = Assignment::new(0, 1);
        let with = subsample_with(&s, a);
        let words: Vec<&Word> = with.pairs().iter().map(|(w, _)| w).collect();
        assert_eq!(words, vec![&bits("10"), &bits("11")]);
        let (x, y) = s.split(a);
        assert_eq!(x.len() + y.len(), s.len());
        assert!(subsample_with(&Sample::empty(domain).unwrap(), a).is_empty());
    }

    #[test]
    fn empty_and_constant_samples_give_leaves() {
        let empty = Sample::empty(Domain::binary(3, 2).unwrap()).unwrap();
        let r = solve_consistency(&empty, 2).unwrap();
        assert_eq!(r.tree().unwrap().depth(), 0);
        let constant = Sample::full_table(&table(3, |_| 1)).unwrap();
        let r = solve_consistency(&constant, 0).unwrap();
        assert_eq!(r.tree().unwrap().root(), &Node::Leaf(1));
    }

    #[test]
    fn xor_is_not_rank_one() {
        let xor = Sample::full_table(&table(2, |w| w.0[0] ^ w.0[1])).unwrap();
        assert_eq!(solve_consistency(&xor, 1).unwrap(), ConsistencyResult::Unsat);
        assert_eq!(solve_consistency(&xor, 2).unwrap().tree().unwrap().depth(), 2);
    }

    #[test]
    fn contradictions_are_reported_separately() {
        let s = Sample::new(Domain::binary(1, 2).unwrap(), vec![(bits("1"), 0), (bits("1"), 1)]).unwrap();
        assert_eq!(
            solve_consistency(&s, 3).unwrap(),
            ConsistencyResult::Contradictory { word: bits("1") }
        );
    }

    #[test]
    fn matches_the_rank_oracle_on_all_small_tables() {
        for n in 1..=3 {
            for code in 0..1usize << (1 << n) {
                let f = table(n, |w| {
                    let i = w.0.iter().fold(0, |acc, &b| acc * 2 + b);
                    (code >> i) & 1
                });
                let rank = rank_exact_yesdepth(&f, Budget::default()).unwrap().value;
                let s = Sample::full_table(&f).unwrap();
                for k in 0..=n {
                    let r = solve_consistency(&s, k).unwrap();
                    assert_eq!(r.tree().is_some(), rank <= k, "n={n} code={code} k={k}");
                    if let Some(t) = r.tree() {
                        assert!(t.depth() <= k);
                        assert!(t.computes(&f, 1 << 10).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let s = Sample::new(Domain::new(vec![3, 2], 5).unwrap(), vec![(Word(vec![2, 1]), 1)]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"sigma_sizes":[3,2],"pairs":[[[2,1],1]]}"#);
        assert_eq!(serde_json::from_str::<Sample>(&text).unwrap(), s);
        assert!(serde_json::from_str::<Sample>(r#"{"sigma_sizes":[2],"pairs":[[[0],2]]}"#).is_err());
    }

    #[test]
    fn pac_learns_constants_exactly() {
        let f = table(4, |_| 0);
        let mut src = SampleSource::uniform(Hidden::Table(f), 1).unwrap();
        match pac_learn(&mut src, 0, 0.1, 0.1).unwrap() {
            PacOutcome::Hypothesis { tree, .. } => assert_eq!(src.error_of(&tree, 1 << 10).unwrap(), 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pac_fails_on_xor_with_k_one() {
        let f = table(2, |w| w.0[0] ^ w.0[1]);
        let mut src = SampleSource::uniform(Hidden::Table(f), 2).unwrap();
        let out = pac_learn(&mut src, 1, 0.1, 0.1).unwrap();
        assert!(matches!(out, PacOutcome::Fail { certificate: ConsistencyResult::Unsat, .. }));
    }

    #[test]
    fn pac_learns_random_rank_one_trees() {
        let domain = Domain::binary(6, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut good = 0;
        for seed in 0..20 {
            let hidden = random_tree(&domain, 1, 1, &mut rng).unwrap();
            let mut src = SampleSource::uniform(Hidden::Tree(hidden), seed).unwrap();
            if let PacOutcome::Hypothesis { tree, .. } = pac_learn(&mut src, 1, 0.1, 0.1).unwrap() {
                assert!(tree.depth() <= 1);
                if src.error_of(&tree, 1 << 10).unwrap() <= 0.1 {
                    good += 1;
                }
            }
        }
        assert!(good >= 18, "{good}/20");
    }

    #[test]
    fn weighted_sources_are_reproducible() {
        let f = table(2, |w| w.0[0]);
        let weights = vec![0.0, 1.0, 0.0, 3.0];
        let mut a = SampleSource::weighted(Hidden::Table(f.clone()), weights.clone(), 9).unwrap();
        let mut b = SampleSource::weighted(Hidden::Table(f), weights, 9).unwrap();
        let sa = a.draw_sample(50).unwrap();
        assert_eq!(sa, b.draw_sample(50).unwrap());
        assert!(sa.pairs().iter().all(|(w, _)| w.0[1] == 1));
    }
}
