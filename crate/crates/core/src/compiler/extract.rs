use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::decoder::{dot, DecoderMachine, Scalar, TieRule};
use crate::domain::{Budget, Word};
use crate::error::{Error, Result};
use crate::trees::{AQuery, AnswerKey, DecisionTree, HQuery, Node};

/// Depth-`t` tree over `H`-degree a-queries that agrees with `t` iterations
/// of `machine` on every word of its domain.
pub fn extract_tree<S: Scalar>(machine: &DecoderMachine<S>, t: usize) -> Result<DecisionTree> {
    extract_tree_within(machine, t, Budget::default())
}

pub fn extract_tree_within<S: Scalar>(machine: &DecoderMachine<S>, t: usize, budget: Budget) -> Result<DecisionTree> {
    if t == 0 {
        return Err(Error::invalid("extraction needs t >= 1 iterations"));
    }
    let words = machine.domain().words_within(budget.table_entries)?;
    let refs: Vec<&Word> = words.iter().collect();
    let ys = vec![machine.encoding().eol.clone()];
    let root = extract_node(machine, &ys, t, &refs)?;
    DecisionTree::new(machine.domain().clone(), machine.heads(), root)
}

/// What head `h` sees at a state, independent of the word.
struct HeadView<S> {
    order: AQuery,
    scores: Vec<S>,
    /// Lowest and highest score tied with each assignment's score.
    bounds: Vec<(S, S)>,
    /// Best score among `y₀…y_t` and the leftmost `y` attaining it.
    y_best: S,
    y_index: usize,
}

fn extract_node<S: Scalar>(machine: &DecoderMachine<S>, ys: &[Vec<S>], left: usize, words: &[&Word]) -> Result<Node> {
    let last = ys.last().expect("y₀ is always present");
    if left == 0 {
        return Ok(Node::Leaf(machine.output(last)?));
    }
    let rule = machine.ties();
    let views = (0..machine.heads())
        .map(|h| head_view(machine, ys, h, rule))
        .collect::<Result<Vec<_>>>()?;
    let query = HQuery::new(views.iter().map(|v| v.order.clone()).collect())?;

    let mut groups: BTreeMap<AnswerKey, Vec<&Word>> = BTreeMap::new();
    for &w in words {
        groups.entry(query.eval(machine.domain(), w)).or_default().push(w);
    }
    let groups: Vec<(AnswerKey, Vec<&Word>)> = groups.into_iter().collect();
    let children = groups
        .par_iter()
        .map(|(key, ws)| {
            let mut concat = Vec::with_capacity(machine.d() * machine.heads());
            for (view, &a) in views.iter().zip(key) {
                let token = match lands_on_x(view, a, rule)? {
                    true => &machine.encoding().assignments[a],
                    false => &ys[view.y_index],
                };
                concat.extend_from_slice(token);
            }
            let next = machine.layer().combine(&concat, last)?;
            let mut longer = ys.to_vec();
            longer.push(next);
            Ok((key.clone(), extract_node(machine, &longer, left - 1, ws)?))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(Node::Internal { query, children })
}

fn head_view<S: Scalar>(machine: &DecoderMachine<S>, ys: &[Vec<S>], h: usize, rule: TieRule) -> Result<HeadView<S>> {
    let layer = machine.layer();
    let domain = machine.domain();
    let q = layer.query(h, ys.last().expect("non-empty"))?;
    let score = |x: &[S]| -> Result<S> { Ok(dot(&layer.k(h).apply(x)?, &q)) };
    let scores = machine
        .encoding()
        .assignments
        .iter()
        .map(|p| score(p))
        .collect::<Result<Vec<S>>>()?;
    let y_scores = ys.iter().map(|y| score(y)).collect::<Result<Vec<S>>>()?;

    let mut by_score: Vec<usize> = (0..scores.len()).collect();
    by_score.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let exact = S::EXACT || rule.exact;
    // Chain scores closer than the tolerance into tie classes.
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for a in by_score {
        let joins = classes.last().is_some_and(|c| {
            let prev = &scores[*c.last().expect("classes are non-empty")];
            if exact {
                *prev == scores[a]
            } else {
                prev.to_f64() - scores[a].to_f64() <= rule.tolerance
            }
        });
        match joins {
            true => classes.last_mut().expect("checked").push(a),
            false => classes.push(vec![a]),
        }
    }
    let mut order = Vec::with_capacity(scores.len());
    let mut bounds = vec![(S::zero(), S::zero()); scores.len()];
    for mut class in classes {
        let hi = scores[class[0]].clone();
        let lo = scores[*class.last().expect("non-empty")].clone();
        if !exact && hi.to_f64() - lo.to_f64() > rule.tolerance {
            return Err(Error::Ambiguous(format!(
                "head {} scores chain across more than {} at an extraction state; use the rational backend",
                h + 1,
                rule.tolerance
            )));
        }
        class.sort_by_key(|&a| (domain.assignment(a).position, a));
        for &a in &class {
            bounds[a] = (lo.clone(), hi.clone());
        }
        order.extend(class);
    }

    let mut y_index = 0;
    for (i, s) in y_scores.iter().enumerate() {
        if *s > y_scores[y_index] {
            y_index = i;
        }
    }
    let y_best = y_scores[y_index].clone();
    // The machine takes the leftmost y tied with the maximum.
    y_index = y_scores.iter().position(|s| rule.tied(s, &y_best)).expect("non-empty");
    Ok(HeadView {
        order: AQuery::new(domain, order)?,
        scores,
        bounds,
        y_best,
        y_index,
    })
}

/// Whether the head attends to the input token of the answered assignment
/// `a` rather than to a chain-of-thought token. Inputs precede outputs, so
/// ties go to the input.
fn lands_on_x<S: Scalar>(view: &HeadView<S>, a: usize, rule: TieRule) -> Result<bool> {
    let y = &view.y_best;
    if S::EXACT || rule.exact {
        return Ok(view.scores[a] >= *y);
    }
    let (lo, hi) = &view.bounds[a];
    let (lo, hi, yf) = (lo.to_f64(), hi.to_f64(), y.to_f64());
    if (lo == hi && hi == yf) || yf < lo - rule.tolerance {
        Ok(true)
    } else if yf > hi + rule.tolerance {
        Ok(false)
    } else {
        Err(Error::Ambiguous(format!(
            "input score {} and output score {yf} are within {}; use the rational backend",
            view.scores[a].to_f64(),
            rule.tolerance
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_tree;
    use crate::decoder::{build_comp_decoder, AttentionLayer, Matrix, OutputMap, PositionalEncoding};
    use crate::domain::{comp_eval, Domain};
    use crate::trees::{one_tree, random_tree};
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_nodes<'a>(node: &'a Node, out: &mut Vec<&'a Node>) {
        out.push(node);
        if let Node::Internal { children, .. } = node {
            for c in children.values() {
                all_nodes(c, out);
            }
        }
    }

    #[test]
    fn round_trip_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..40 {
            let sizes = [vec![2, 2, 2], vec![3, 2], vec![2, 3, 2]][i % 3].clone();
            let domain = Domain::new(sizes, 3).unwrap();
            let tree = random_tree(&domain, 1 + i % 2, 3, &mut rng).unwrap();
            let m = compile_tree(&tree).unwrap();
            let back = extract_tree(&m, m.iterations()).unwrap();
            assert_eq!(back.depth(), m.iterations());
            for w in domain.words() {
                assert_eq!(back.eval(&w).unwrap(), tree.eval(&w).unwrap());
            }
        }
    }

    #[test]
    fn float_and_rational_extractions_agree() {
        let tree = one_tree(4, 2).unwrap();
        let m = compile_tree(&tree).unwrap();
        let exact = extract_tree(&m, 2).unwrap();
        let float = extract_tree(&m.to_float(), 2).unwrap();
        assert_eq!(exact, float);
    }

    #[test]
    fn comp_decoder_extracts_to_comp() {
        let m = build_comp_decoder(5, 2).unwrap();
        let tree = extract_tree(&m, 2).unwrap();
        assert_eq!(tree.depth(), 2);
        assert_eq!(tree.heads(), 1);
        for w in m.domain().words() {
            assert_eq!(tree.eval(&w).unwrap() + 1, comp_eval(5, 2, &w).unwrap());
        }
    }

    #[test]
    fn zero_query_machine_extracts_canonical_queries() {
        let domain = Domain::new(vec![2, 3], 3).unwrap();
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut random = || Matrix::from_json(&serde_json::json!({
            "rows": d, "cols": d,
            "data": (0..d * d).map(|_| rng.gen_range(-3..=3) as f64).collect::<Vec<_>>()
        }))
        .unwrap();
        let (k, w_o, w1, w2) = (random(), random(), random(), random());
        let layer = AttentionLayer::new(vec![Matrix::zeros(d, d)], vec![k], w_o, w1, w2).unwrap();
        let assignments = (0..5).map(|a| vec![a as f64, 1.0, -(a as f64)]).collect();
        let encoding = PositionalEncoding { assignments, eol: vec![1.0, 0.0, 2.0] };
        let map = OutputMap::ArgmaxLookup { start: 0, lookup: vec![0, 1, 2] };
        let m = DecoderMachine::new(domain.clone(), layer, encoding, map, 3).unwrap();
        let tree = extract_tree(&m, 3).unwrap();
        let mut nodes = Vec::new();
        all_nodes(tree.root(), &mut nodes);
        for node in nodes {
            if let Node::Internal { query, .. } = node {
                assert_eq!(query.parts()[0], AQuery::canonical(&domain));
            }
        }
        for w in domain.words() {
            assert_eq!(tree.eval(&w).unwrap(), m.compute(&w).unwrap());
        }
    }

    #[test]
    fn extraction_matches_arbitrary_rational_machines() {
        let domain = Domain::new(vec![2, 2, 2], 2).unwrap();
        let d = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let mut random = |cols: usize| {
                let mut m: Matrix<BigRational> = Matrix::zeros(d, cols);
                for i in 0..d {
                    for j in 0..cols {
                        m.set(i, j, BigRational::from_ratio(rng.gen_range(-2..=2), 1));
                    }
                }
                m
            };
            let layer = AttentionLayer::new(
                vec![random(d), random(d)],
                vec![random(d), random(d)],
                random(2 * d),
                random(d),
                random(d),
            )
            .unwrap();
            let assignments = (0..6)
                .map(|_| (0..d).map(|_| BigRational::from_ratio(rng.gen_range(-2..=2), 1)).collect())
                .collect();
            let eol = (0..d).map(|_| BigRational::from_ratio(rng.gen_range(-2..=2), 1)).collect();
            let map = OutputMap::ArgmaxLookup { start: 1, lookup: vec![0, 1] };
            let m = DecoderMachine::new(domain.clone(), layer, PositionalEncoding { assignments, eol }, map, 2).unwrap();
            let tree = extract_tree(&m, 2).unwrap();
            assert_eq!(tree.depth(), 2);
            for w in domain.words() {
                assert_eq!(tree.eval(&w).unwrap(), m.compute(&w).unwrap());
            }
        }
    }

    #[test]
    fn float_near_ties_between_input_and_output_are_ambiguous() {
        let domain = Domain::new(vec![1], 2).unwrap();
        let d = 2;
        let mut q = Matrix::zeros(d, d);
        q.set(0, 1, 1.0);
        let layer = AttentionLayer::new(vec![q], vec![Matrix::identity(d)], Matrix::identity(d), Matrix::identity(d), Matrix::identity(d)).unwrap();
        let encoding = PositionalEncoding { assignments: vec![vec![1.0, 0.0]], eol: vec![1.0 + 1e-12, 1.0] };
        let map = OutputMap::ArgmaxLookup { start: 0, lookup: vec![0, 1] };
        let m = DecoderMachine::new(domain, layer, encoding, map, 1).unwrap();
        assert!(matches!(extract_tree(&m, 1), Err(Error::Ambiguous(_))));
    }
}
