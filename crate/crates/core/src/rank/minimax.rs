use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::RankCertificate;
use crate::domain::{Budget, Domain, FunctionTable, Word};
use crate::error::{Error, Result};
use crate::trees::{AQuery, DecisionTree, HQuery, Node};

/// Largest assignment count the permutation searches accept by default.
pub const DEFAULT_MAX_ASSIGNMENTS: usize = 6;

/// Words are tracked as bit sets.
type WordSet = u128;

/// Outcome of the multi-head brute force.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MhRank {
    Exact(usize),
    /// The budget ran out, or no tree of depth `max_depth` exists.
    Unknown,
}

/// The distinct answer functions of all `|A|!` a-queries on the domain's
/// words, each with the lexicographically first order realizing it.
struct Orders {
    domain: Domain,
    words: Vec<Word>,
    outputs: Vec<usize>,
    reps: Vec<AQuery>,
    answers: Vec<Vec<u8>>,
}

impl Orders {
    fn new(f: &FunctionTable, max_a: usize) -> Result<Self> {
        let domain = f.domain().clone();
        let size = domain.num_assignments();
        if size > max_a {
            return Err(Error::resource("assignments for permutation search", size as u128, max_a as u128));
        }
        let words = domain.words_within(WordSet::BITS as usize)?;
        let outputs = words.iter().map(|w| f.eval(w)).collect();
        let consistent: Vec<Vec<usize>> = words
            .iter()
            .map(|w| (0..domain.n()).map(|p| domain.consistent_index(w, p)).collect())
            .collect();
        let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut reps = Vec::new();
        let mut answers = Vec::new();
        let mut order: Vec<usize> = (0..size).collect();
        loop {
            let mut rank = vec![0; size];
            for (k, &a) in order.iter().enumerate() {
                rank[a] = k;
            }
            let ans: Vec<u8> = consistent
                .iter()
                .map(|cs| *cs.iter().min_by_key(|&&a| rank[a]).unwrap() as u8)
                .collect();
            if !seen.contains_key(&ans) {
                seen.insert(ans.clone(), reps.len());
                reps.push(AQuery::new(&domain, order.clone())?);
                answers.push(ans);
            }
            if !next_permutation(&mut order) {
                break;
            }
        }
        Ok(Orders {
            domain,
            words,
            outputs,
            reps,
            answers,
        })
    }

    fn all(&self) -> WordSet {
        if self.words.len() == WordSet::BITS as usize {
            WordSet::MAX
        } else {
            (1 << self.words.len()) - 1
        }
    }

    fn constant(&self, set: WordSet) -> Option<usize> {
        let mut out = None;
        for w in bits(set) {
            match out {
                None => out = Some(self.outputs[w]),
                Some(o) if o != self.outputs[w] => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(0))
    }

    /// Parts of `set` by the joint answer of `combo`, keyed by answer tuple.
    fn split(&self, set: WordSet, combo: &[usize]) -> BTreeMap<Vec<usize>, WordSet> {
        let mut parts: BTreeMap<Vec<usize>, WordSet> = BTreeMap::new();
        for w in bits(set) {
            let key = combo.iter().map(|&c| self.answers[c][w] as usize).collect();
            *parts.entry(key).or_default() |= 1 << w;
        }
        parts
    }
}

fn bits(set: WordSet) -> impl Iterator<Item = usize> {
    let mut rest = set;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let w = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(w)
        }
    })
}

pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Non-decreasing index tuples of length `h` over `0..d`.
fn combos(d: usize, h: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; h];
    if d == 0 {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = h;
        while i > 0 && cur[i - 1] == d - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        let v = cur[i - 1];
        for c in &mut cur[i..] {
            *c = v;
        }
    }
}

fn combo_count(d: usize, h: usize) -> u128 {
    // C(d + h - 1, h)
    let mut c: u128 = 1;
    for i in 0..h as u128 {
        c = c.saturating_mul(d as u128 + i) / (i + 1);
    }
    c
}

/// Minimal a-query depth by minimax over every query order at every node,
/// memoized on the set of words still possible.
pub fn rank_exact_minimax(f: &FunctionTable, max_a: usize) -> Result<RankCertificate> {
    let orders = Orders::new(f, max_a)?;
    let mut memo: HashMap<WordSet, (usize, usize)> = HashMap::new();
    let full = orders.all();
    let value = minimax_value(&orders, full, &mut memo);
    let root = minimax_witness(&orders, full, &mut memo);
    Ok(RankCertificate {
        value,
        exhausted: true,
        witness: DecisionTree::new(orders.domain.clone(), 1, root)?,
    })
}

fn minimax_value(o: &Orders, set: WordSet, memo: &mut HashMap<WordSet, (usize, usize)>) -> usize {
    if let Some(&(v, _)) = memo.get(&set) {
        return v;
    }
    let result = if o.constant(set).is_some() {
        (0, usize::MAX)
    } else {
        let mut best = (usize::MAX, usize::MAX);
        for c in 0..o.answers.len() {
            let parts = o.split(set, &[c]);
            if parts.len() < 2 {
                continue;
            }
            let mut worst = 0;
            for &part in parts.values() {
                worst = worst.max(minimax_value(o, part, memo));
                if worst + 1 >= best.0 {
                    break;
                }
            }
            if worst + 1 < best.0 {
                best = (worst + 1, c);
                if best.0 == 1 {
                    break;
                }
            }
        }
        best
    };
    memo.insert(set, result);
    result.0
}

fn minimax_witness(o: &Orders, set: WordSet, memo: &mut HashMap<WordSet, (usize, usize)>) -> Node {
    minimax_value(o, set, memo);
    let (_, choice) = memo[&set];
    if choice == usize::MAX {
        return Node::Leaf(o.constant(set).expect("value 0 means constant"));
    }
    let children = o
        .split(set, &[choice])
        .into_iter()
        .map(|(key, part)| (key, minimax_witness(o, part, memo)))
        .collect();
    Node::Internal {
        query: HQuery::single(o.reps[choice].clone()),
        children,
    }
}

/// Searches for `H` orders whose joint answer determines `f`. Returns a
/// depth-1 certificate (depth 0 for constant `f`), or `None` when no tuple
/// works; the search over tuples is exhaustive.
pub fn mh_depth1_search(f: &FunctionTable, heads: usize, max_a: usize, budget: Budget) -> Result<Option<RankCertificate>> {
    if heads == 0 {
        return Err(Error::invalid("need at least one head"));
    }
    let orders = Orders::new(f, max_a)?;
    let full = orders.all();
    if let Some(o) = orders.constant(full) {
        return Ok(Some(RankCertificate {
            value: 0,
            exhausted: true,
            witness: DecisionTree::leaf(orders.domain.clone(), heads, o)?,
        }));
    }
    let count = combo_count(orders.answers.len(), heads);
    if count > budget.search_states as u128 {
        return Err(Error::resource("H-tuples of query orders", count, budget.search_states as u128));
    }
    let found = combos(orders.answers.len(), heads)
        .into_par_iter()
        .find_first(|combo| determines(&orders, full, combo));
    let Some(combo) = found else {
        return Ok(None);
    };
    let children = orders
        .split(full, &combo)
        .into_iter()
        .map(|(key, part)| (key, Node::Leaf(orders.constant(part).expect("determined"))))
        .collect();
    let query = HQuery::new(combo.iter().map(|&c| orders.reps[c].clone()).collect())?;
    Ok(Some(RankCertificate {
        value: 1,
        exhausted: true,
        witness: DecisionTree::new(orders.domain.clone(), heads, Node::Internal { query, children })?,
    }))
}

fn determines(o: &Orders, set: WordSet, combo: &[usize]) -> bool {
    o.split(set, combo).values().all(|&part| o.constant(part).is_some())
}

/// Exact `H`-head rank by iterative deepening up to `max_depth`, counting
/// partition evaluations against the search budget.
pub fn mh_rank_bruteforce(f: &FunctionTable, heads: usize, max_depth: usize, max_a: usize, budget: Budget) -> Result<MhRank> {
    if heads == 0 {
        return Err(Error::invalid("need at least one head"));
    }
    let orders = match Orders::new(f, max_a) {
        Ok(o) => o,
        Err(e) if e.is_resource() => return Ok(MhRank::Unknown),
        Err(e) => return Err(e),
    };
    let mut search = MhSearch {
        orders: &orders,
        combos: combos(orders.answers.len(), heads),
        memo: HashMap::new(),
        spent: 0,
        budget: budget.search_states,
    };
    let full = orders.all();
    for depth in 0..=max_depth {
        match search.can(full, depth) {
            Some(true) => return Ok(MhRank::Exact(depth)),
            Some(false) => {}
            None => return Ok(MhRank::Unknown),
        }
    }
    Ok(MhRank::Unknown)
}

struct MhSearch<'a> {
    orders: &'a Orders,
    combos: Vec<Vec<usize>>,
    memo: HashMap<(WordSet, usize), bool>,
    spent: usize,
    budget: usize,
}

impl MhSearch<'_> {
    /// `None` once the budget is spent.
    fn can(&mut self, set: WordSet, depth: usize) -> Option<bool> {
        if self.orders.constant(set).is_some() {
            return Some(true);
        }
        if depth == 0 {
            return Some(false);
        }
        if let Some(&r) = self.memo.get(&(set, depth)) {
            return Some(r);
        }
        let mut result = false;
        for i in 0..self.combos.len() {
            self.spent += 1;
            if self.spent > self.budget {
                return None;
            }
            let parts = self.orders.split(set, &self.combos[i]);
            if parts.len() < 2 {
                continue;
            }
            let mut all = true;
            for &part in parts.values() {
                if !self.can(part, depth - 1)? {
                    all = false;
                    break;
                }
            }
            if all {
                result = true;
                break;
            }
        }
        self.memo.insert((set, depth), result);
        Some(result)
    }
}
