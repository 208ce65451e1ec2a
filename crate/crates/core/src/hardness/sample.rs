use std::collections::{BTreeMap, HashMap};

use super::{OrderPair, SetFamilyInstance};
use crate::domain::{Domain, Word};
use crate::error::{Error, Result};
use crate::learning::Sample;
use crate::trees::{AQuery, DecisionTree, HQuery, Node};

/// Auxiliary positions `u, v, w` come first, then three groups of `|U|`
/// working positions.
const AUX_U: usize = 0;
const AUX_V: usize = 1;
const AUX_W: usize = 2;
const AUX: usize = 3;

/// Binary sample over `3|U| + 3` positions: characteristic vectors of the
/// `F`-sets (positive) and `G`-sets (negative) in each of the three working
/// groups, followed by the gadget rows.
pub fn reduce_2order_to_sample(inst: &SetFamilyInstance) -> Result<Sample> {
    let m = inst.universe().len();
    let n = AUX + 3 * m;
    let mut pairs = Vec::new();
    for group in 0..3 {
        for (family, label) in [(inst.f(), 1), (inst.g(), 0)] {
            for set in family {
                let mut w = vec![0; n];
                for &e in set {
                    w[AUX + group * m + e] = 1;
                }
                pairs.push((Word(w), label));
            }
        }
    }
    let (pos, neg) = gadget_rows(m);
    pairs.extend(pos.into_iter().map(|w| (w, 1)));
    pairs.extend(neg.into_iter().map(|w| (w, 0)));
    Sample::new(Domain::binary(n, 2)?, pairs)
}

/// Positive and negative gadget rows for a universe of size `m`, each
/// `3m + 3` long.
pub fn gadget_rows(m: usize) -> (Vec<Word>, Vec<Word>) {
    let working = 3 * m;
    let row = |aux: [usize; 3], work: &dyn Fn(usize) -> usize| {
        Word(aux.into_iter().chain((0..working).map(work)).collect())
    };
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for i in 0..working {
        pos.push(row([1, 0, 0], &|j| usize::from(j == i)));
        neg.push(row([0, 1, 0], &|j| usize::from(j == i)));
    }
    pos.push(row([0, 1, 0], &|_| 0));
    neg.push(row([1, 0, 0], &|_| 0));
    pos.extend([row([1, 0, 1], &|_| 1), row([0, 1, 1], &|_| 1)]);
    neg.extend([row([1, 1, 1], &|_| 1), row([0, 0, 1], &|_| 1)]);
    (pos, neg)
}

pub fn gadget_sample(m: usize) -> Result<Sample> {
    let (pos, neg) = gadget_rows(m);
    let pairs = pos.into_iter().map(|w| (w, 1)).chain(neg.into_iter().map(|w| (w, 0))).collect();
    Sample::new(Domain::binary(AUX + 3 * m, 2)?, pairs)
}

fn index(p: usize, letter: usize) -> usize {
    2 * p + letter
}

/// Orders on the sample's assignments: every 1-assignment above every
/// 0-assignment; `(u,1)` then `(w,1)` on top of the first order with `(v,1)`
/// the lowest 1-assignment, mirrored in the second. Working 1-assignments of
/// group `g` follow `within[k]` (an order on `0..m`) in order `k`.
fn aux_orders(m: usize, within: [&[usize]; 2]) -> OrderPair {
    let n = AUX + 3 * m;
    let build = |top: usize, bottom: usize, within: &[usize]| {
        let mut order = vec![index(top, 1), index(AUX_W, 1)];
        for g in 0..3 {
            order.extend(within.iter().map(|&e| index(AUX + g * m + e, 1)));
        }
        order.push(index(bottom, 1));
        order.extend((0..n).map(|p| index(p, 0)));
        order
    };
    OrderPair::new(build(AUX_U, AUX_V, within[0]), build(AUX_V, AUX_U, within[1])).expect("permutations")
}

/// Orders separating the gadget rows for a universe of size `m`.
pub fn gadget_orders(m: usize) -> OrderPair {
    let id: Vec<usize> = (0..m).collect();
    aux_orders(m, [&id, &id])
}

/// Carries a pair separating `inst` to a pair separating its sample.
pub fn lift_orders(orders: &OrderPair, m: usize) -> Result<OrderPair> {
    if orders.len() != m {
        return Err(Error::invalid("orders do not range over the universe"));
    }
    Ok(aux_orders(m, [orders.first(), orders.second()]))
}

fn word_maxima(domain: &Domain, orders: &OrderPair, w: &Word) -> (usize, usize) {
    let present = (0..domain.n()).map(|p| domain.consistent_index(w, p));
    orders.maxima(present).expect("non-empty domain")
}

fn check_orders(orders: &OrderPair, s: &Sample) -> Result<()> {
    if orders.len() != s.domain().num_assignments() || s.domain().n() == 0 {
        return Err(Error::invalid("orders must range over the sample's assignments"));
    }
    Ok(())
}

/// No positive and negative word of `s` share their pair of maxima.
pub fn sample_separates(orders: &OrderPair, s: &Sample) -> Result<bool> {
    check_orders(orders, s)?;
    let mut labels: HashMap<(usize, usize), usize> = HashMap::new();
    for (w, l) in s.pairs() {
        if *labels.entry(word_maxima(s.domain(), orders, w)).or_insert(*l) != *l {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The depth-1 two-head tree asking both orders, labelled from `s`; keys no
/// word of `s` reaches get output 0.
pub fn tree_from_orders(orders: &OrderPair, s: &Sample) -> Result<DecisionTree> {
    check_orders(orders, s)?;
    let domain = s.domain();
    let mut labels: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (w, l) in s.pairs() {
        let (a, b) = word_maxima(domain, orders, w);
        if *labels.entry(vec![a, b]).or_insert(*l) != *l {
            return Err(Error::invalid("the orders do not separate the sample"));
        }
    }
    let query = HQuery::new(vec![
        AQuery::new(domain, orders.first().to_vec())?,
        AQuery::new(domain, orders.second().to_vec())?,
    ])?;
    let na = domain.num_assignments();
    let mut children = BTreeMap::new();
    for a in 0..na {
        for b in 0..na {
            let key = vec![a, b];
            let label = labels.get(&key).copied().unwrap_or(0);
            children.insert(key, Node::Leaf(label));
        }
    }
    DecisionTree::new(domain.clone(), 2, Node::Internal { query, children })
}

/// `(u,1)`, `(v,1)` and `(w,1)` as assignment indices.
pub fn aux_ones() -> [usize; 3] {
    [AUX_U, AUX_V, AUX_W].map(|p| index(p, 1))
}
