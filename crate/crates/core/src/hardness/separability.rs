use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::NAEFormula;
use crate::error::{Error, Result};
use crate::rank::next_permutation;

/// Universe size searched by [`two_order_separable_bruteforce`] unless told otherwise.
pub const DEFAULT_MAX_UNIVERSE: usize = 6;

/// Two families of non-empty subsets of a named universe. Sets hold element
/// indices, sorted and without repeats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct SetFamilyInstance {
    universe: Vec<String>,
    f: Vec<Vec<usize>>,
    g: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    universe: Vec<String>,
    #[serde(rename = "F")]
    f: Vec<Vec<String>>,
    #[serde(rename = "G")]
    g: Vec<Vec<String>>,
}

impl TryFrom<InstanceRepr> for SetFamilyInstance {
    type Error = Error;
    fn try_from(r: InstanceRepr) -> Result<Self> {
        SetFamilyInstance::from_names(r.universe, &r.f, &r.g)
    }
}

impl From<SetFamilyInstance> for InstanceRepr {
    fn from(inst: SetFamilyInstance) -> Self {
        let names = |sets: &[Vec<usize>]| -> Vec<Vec<String>> {
            sets.iter()
                .map(|s| s.iter().map(|&e| inst.universe[e].clone()).collect())
                .collect()
        };
        InstanceRepr {
            f: names(&inst.f),
            g: names(&inst.g),
            universe: inst.universe,
        }
    }
}

impl SetFamilyInstance {
    pub fn new(universe: Vec<String>, f: Vec<Vec<usize>>, g: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = HashSet::new();
        if let Some(dup) = universe.iter().find(|x| !seen.insert(*x)) {
            return Err(Error::invalid(format!("element {dup:?} listed twice")));
        }
        let clean = |sets: Vec<Vec<usize>>| -> Result<Vec<Vec<usize>>> {
            sets.into_iter()
                .map(|mut s| {
                    s.sort_unstable();
                    s.dedup();
                    if s.is_empty() {
                        return Err(Error::invalid("families hold non-empty sets only"));
                    }
                    if s.last().is_some_and(|&e| e >= universe.len()) {
                        return Err(Error::invalid("set element outside the universe"));
                    }
                    Ok(s)
                })
                .collect()
        };
        let (f, g) = (clean(f)?, clean(g)?);
        Ok(SetFamilyInstance { universe, f, g })
    }

    pub fn from_names<S: AsRef<str>>(universe: Vec<String>, f: &[Vec<S>], g: &[Vec<S>]) -> Result<Self> {
        let index: HashMap<&str, usize> = universe.iter().enumerate().map(|(i, x)| (x.as_str(), i)).collect();
        let resolve = |sets: &[Vec<S>]| -> Result<Vec<Vec<usize>>> {
            sets.iter()
                .map(|s| {
                    s.iter()
                        .map(|x| {
                            index
                                .get(x.as_ref())
                                .copied()
                                .ok_or_else(|| Error::invalid(format!("{:?} is not in the universe", x.as_ref())))
                        })
                        .collect()
                })
                .collect()
        };
        let (f, g) = (resolve(f)?, resolve(g)?);
        SetFamilyInstance::new(universe, f, g)
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn f(&self) -> &[Vec<usize>] {
        &self.f
    }

    pub fn g(&self) -> &[Vec<usize>] {
        &self.g
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.universe.iter().position(|x| x == name)
    }
}

/// Two linear orders on `0..m`, each listed from largest to smallest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[Vec<usize>; 2]", into = "[Vec<usize>; 2]")]
pub struct OrderPair {
    orders: [Vec<usize>; 2],
    /// `ranks[k][e]` is the place of `e` in order `k`, 0 for the maximum.
    ranks: [Vec<usize>; 2],
}

impl TryFrom<[Vec<usize>; 2]> for OrderPair {
    type Error = Error;
    fn try_from(orders: [Vec<usize>; 2]) -> Result<Self> {
        let [a, b] = orders;
        OrderPair::new(a, b)
    }
}

impl From<OrderPair> for [Vec<usize>; 2] {
    fn from(p: OrderPair) -> Self {
        p.orders
    }
}

impl OrderPair {
    pub fn new(first: Vec<usize>, second: Vec<usize>) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::invalid("the two orders have different lengths"));
        }
        let ranks = [ranks_of(&first)?, ranks_of(&second)?];
        Ok(OrderPair {
            orders: [first, second],
            ranks,
        })
    }

    pub fn len(&self) -> usize {
        self.orders[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders[0].is_empty()
    }

    pub fn first(&self) -> &[usize] {
        &self.orders[0]
    }

    pub fn second(&self) -> &[usize] {
        &self.orders[1]
    }

    pub fn is_above(&self, k: usize, x: usize, y: usize) -> bool {
        self.ranks[k][x] < self.ranks[k][y]
    }

    fn max_in(&self, k: usize, set: impl IntoIterator<Item = usize>) -> Option<usize> {
        set.into_iter().min_by_key(|&e| self.ranks[k][e])
    }

    /// The maximum of `set` under each order.
    pub fn maxima(&self, set: impl IntoIterator<Item = usize> + Clone) -> Option<(usize, usize)> {
        Some((self.max_in(0, set.clone())?, self.max_in(1, set)?))
    }
}

fn ranks_of(order: &[usize]) -> Result<Vec<usize>> {
    let mut ranks = vec![usize::MAX; order.len()];
    for (i, &e) in order.iter().enumerate() {
        match ranks.get_mut(e) {
            Some(r) if *r == usize::MAX => *r = i,
            _ => return Err(Error::invalid(format!("order {order:?} is not a permutation"))),
        }
    }
    Ok(ranks)
}

pub fn maxima_pair(set: &[usize], orders: &OrderPair) -> Result<(usize, usize)> {
    if set.iter().any(|&e| e >= orders.len()) {
        return Err(Error::invalid("set element outside the ordered universe"));
    }
    orders
        .maxima(set.iter().copied())
        .ok_or_else(|| Error::invalid("the empty set has no maxima"))
}

/// No set of `F` shares its pair of maxima with a set of `G`.
pub fn separates(orders: &OrderPair, inst: &SetFamilyInstance) -> Result<bool> {
    if orders.len() != inst.universe.len() {
        return Err(Error::invalid("orders and instance have different universes"));
    }
    let pairs: HashSet<(usize, usize)> = inst.f.iter().map(|s| maxima_pair(s, orders)).collect::<Result<_>>()?;
    for t in &inst.g {
        if pairs.contains(&maxima_pair(t, orders)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lexicographically first separating pair (first order, then second), by
/// trying all `(|U|!)²` pairs.
pub fn two_order_separable_bruteforce(inst: &SetFamilyInstance, max_universe: usize) -> Result<Option<OrderPair>> {
    let m = inst.universe.len();
    if m > max_universe {
        return Err(Error::resource("universe elements for order search", m as u128, max_universe as u128));
    }
    let mut perms = Vec::new();
    let mut p: Vec<usize> = (0..m).collect();
    loop {
        perms.push(p.clone());
        if !next_permutation(&mut p) {
            break;
        }
    }
    let rank_tables: Vec<Vec<usize>> = perms.iter().map(|p| ranks_of(p).expect("permutation")).collect();
    let top = |ranks: &[usize], s: &[usize]| *s.iter().min_by_key(|&&e| ranks[e]).expect("non-empty");
    let found = rank_tables.par_iter().enumerate().find_map_first(|(i, r1)| {
        let conflicts: Vec<(&Vec<usize>, &Vec<usize>)> = inst
            .f
            .iter()
            .flat_map(|s| inst.g.iter().map(move |t| (s, t)))
            .filter(|(s, t)| top(r1, s) == top(r1, t))
            .collect();
        rank_tables
            .iter()
            .position(|r2| conflicts.iter().all(|(s, t)| top(r2, s) != top(r2, t)))
            .map(|j| (i, j))
    });
    Ok(found.map(|(i, j)| OrderPair::new(perms[i].clone(), perms[j].clone()).expect("permutations")))
}

/// Index layout of [`reduce_nae_to_2order`]'s universe.
#[derive(Clone, Copy)]
struct NaeNames {
    vars: usize,
}

impl NaeNames {
    fn zero(&self) -> usize {
        self.vars
    }
    fn var_fresh(&self, x: usize, k: usize) -> usize {
        self.vars + 1 + 3 * x + k
    }
    fn clause_fresh(&self, c: usize, k: usize) -> usize {
        self.vars + 1 + 3 * self.vars + 3 * c + k
    }
}

const U: usize = 0;
const V: usize = 1;
const W: usize = 2;

/// Universe: variables `x1…xn`, the element `0`, then fresh `xi.u, xi.v, xi.w`
/// per variable and `cj.u, cj.v, cj.w` per clause.
pub fn reduce_nae_to_2order(phi: &NAEFormula) -> SetFamilyInstance {
    let n = phi.num_vars();
    let names = NaeNames { vars: n };
    let mut universe: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    universe.push("0".into());
    for i in 1..=n {
        universe.extend(["u", "v", "w"].map(|s| format!("x{i}.{s}")));
    }
    for j in 1..=phi.clauses().len() {
        universe.extend(["u", "v", "w"].map(|s| format!("c{j}.{s}")));
    }
    let z = names.zero();
    let (mut f, mut g) = (Vec::new(), Vec::new());
    for x in 0..n {
        let [u, v, w] = [U, V, W].map(|k| names.var_fresh(x, k));
        f.extend([vec![u, v, w, x, z], vec![u, x, z], vec![v, x, z]]);
        g.extend([vec![u, w, x, z], vec![v, w, x, z], vec![u, z], vec![v, x]]);
    }
    for (c, &[x, y, t]) in phi.clauses().iter().enumerate() {
        let [u, v, w] = [U, V, W].map(|k| names.clause_fresh(c, k));
        f.extend([vec![u, v, w, x, y, t, z], vec![u, x, y, t, z], vec![v, x, y, t, z]]);
        g.extend([vec![u, w, x, y, t, z], vec![v, w, x, y, t, z], vec![u, z], vec![v, z]]);
    }
    SetFamilyInstance::new(universe, f, g).expect("construction is well-formed")
}

/// The separating orders built from a NAE-satisfying assignment: true
/// variables sit above `0` in the first order and below it in the second.
///
/// Every fresh triple `u, v, w` is placed as `u, w, …, v` in one order and
/// `v, w, …, u` in the other, with `u` on top in the order where the variable
/// is below `0` (always the first order for clause triples). Fresh tops and
/// `w`s of all variables and then all clauses come first, then variables and
/// `0`, then the fresh bottoms.
pub fn orders_from_assignment(phi: &NAEFormula, assignment: &[bool]) -> Result<OrderPair> {
    if !phi.nae_satisfied(assignment)? {
        return Err(Error::invalid("the assignment does not NAE-satisfy the formula"));
    }
    let n = phi.num_vars();
    let names = NaeNames { vars: n };
    let build = |k: usize| {
        let first = k == 0;
        // (top, bottom) fresh elements of every block
        let blocks: Vec<(usize, usize, usize)> = (0..n)
            .map(|x| {
                let (top, bottom) = if first != assignment[x] { (U, V) } else { (V, U) };
                let at = |j| names.var_fresh(x, j);
                (at(top), at(W), at(bottom))
            })
            .chain((0..phi.clauses().len()).map(|c| {
                let (top, bottom) = if first { (U, V) } else { (V, U) };
                let at = |j| names.clause_fresh(c, j);
                (at(top), at(W), at(bottom))
            }))
            .collect();
        let mut order: Vec<usize> = blocks.iter().flat_map(|&(top, w, _)| [top, w]).collect();
        order.extend((0..n).filter(|&x| assignment[x] == first));
        order.push(names.zero());
        order.extend((0..n).filter(|&x| assignment[x] != first));
        order.extend(blocks.iter().map(|&(_, _, bottom)| bottom));
        order
    };
    OrderPair::new(build(0), build(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> SetFamilyInstance {
        let u = vec!["u".to_string(), "v".into(), "w".into()];
        SetFamilyInstance::from_names(u, &[vec!["u", "v", "w"]], &[vec!["u", "v"], vec!["u", "w"], vec!["v", "w"]]).unwrap()
    }

    #[test]
    fn maxima_examples() {
        let inst = reduce_nae_to_2order(&NAEFormula::new(1, vec![]).unwrap());
        let id = |s: &str| inst.index_of(s).unwrap();
        let order = |names: [&str; 5]| names.map(id).to_vec();
        let orders = OrderPair::new(order(["x1.u", "x1.w", "0", "x1", "x1.v"]), order(["x1.v", "x1.w", "x1", "0", "x1.u"])).unwrap();
        assert_eq!(maxima_pair(&[id("x1")], &orders).unwrap(), (id("x1"), id("x1")));
        assert_eq!(maxima_pair(&[id("x1.u"), id("x1"), id("0")], &orders).unwrap(), (id("x1.u"), id("x1")));
        assert_eq!(maxima_pair(&(0..5).collect::<Vec<_>>(), &orders).unwrap(), (id("x1.u"), id("x1.v")));
        assert!(maxima_pair(&[], &orders).is_err());
        assert!(separates(&orders, &inst).unwrap());
    }

    #[test]
    fn separation_edge_cases() {
        let one = vec!["u".to_string()];
        let id = OrderPair::new(vec![0], vec![0]).unwrap();
        let empty_g = SetFamilyInstance::new(one.clone(), vec![vec![0]], vec![]).unwrap();
        assert!(separates(&id, &empty_g).unwrap());
        let same = SetFamilyInstance::new(one, vec![vec![0]], vec![vec![0]]).unwrap();
        assert!(!separates(&id, &same).unwrap());
        assert_eq!(two_order_separable_bruteforce(&same, 6).unwrap(), None);
        let two = SetFamilyInstance::from_names(vec!["u".into(), "v".into()], &[vec!["u"]], &[vec!["v"]]).unwrap();
        let found = two_order_separable_bruteforce(&two, 6).unwrap().unwrap();
        assert_eq!(found.first(), &[0, 1]);
        assert_eq!(found.second(), &[0, 1]);
    }

    #[test]
    fn worked_instance_is_inseparable() {
        let inst = worked();
        assert_eq!(two_order_separable_bruteforce(&inst, 6).unwrap(), None);
        let mut p = vec![0, 1, 2];
        loop {
            let mut q = vec![0, 1, 2];
            loop {
                assert!(!separates(&OrderPair::new(p.clone(), q.clone()).unwrap(), &inst).unwrap());
                if !next_permutation(&mut q) {
                    break;
                }
            }
            if !next_permutation(&mut p) {
                break;
            }
        }
    }

    #[test]
    fn reduction_counts() {
        let one = reduce_nae_to_2order(&NAEFormula::new(1, vec![]).unwrap());
        assert_eq!((one.universe().len(), one.f().len(), one.g().len()), (5, 3, 4));
        let phi = NAEFormula::new(3, vec![[0, 1, 2]]).unwrap();
        let inst = reduce_nae_to_2order(&phi);
        assert_eq!((inst.universe().len(), inst.f().len(), inst.g().len()), (16, 12, 16));
        let zero = inst.index_of("0").unwrap();
        assert!(inst.f().iter().all(|s| s.contains(&zero)));
        assert_eq!(inst.universe()[13], "c1.u");
    }

    #[test]
    fn satisfying_assignments_give_separating_orders() {
        let phi = NAEFormula::new(3, vec![[0, 1, 2]]).unwrap();
        let inst = reduce_nae_to_2order(&phi);
        let orders = orders_from_assignment(&phi, &[true, true, false]).unwrap();
        assert!(separates(&orders, &inst).unwrap());
        assert!(orders_from_assignment(&phi, &[true, true, true]).is_err());
        let single = NAEFormula::new(1, vec![]).unwrap();
        for x in [false, true] {
            let orders = orders_from_assignment(&single, &[x]).unwrap();
            assert!(separates(&orders, &reduce_nae_to_2order(&single)).unwrap());
        }
    }

    #[test]
    fn forward_soundness_on_all_small_formulas() {
        for n in 1..=3 {
            let clause_sets: Vec<Vec<[usize; 3]>> = if n == 3 { vec![vec![], vec![[0, 1, 2]], vec![[0, 1, 2], [2, 0, 1]]] } else { vec![vec![]] };
            for clauses in clause_sets {
                let phi = NAEFormula::new(n, clauses).unwrap();
                let inst = reduce_nae_to_2order(&phi);
                for code in 0..1 << n {
                    let a: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
                    match orders_from_assignment(&phi, &a) {
                        Ok(orders) => assert!(separates(&orders, &inst).unwrap()),
                        Err(_) => assert!(!phi.nae_satisfied(&a).unwrap()),
                    }
                }
            }
        }
    }

    #[test]
    fn brute_force_agrees_with_single_variable_theory() {
        let phi = NAEFormula::new(1, vec![]).unwrap();
        let inst = reduce_nae_to_2order(&phi);
        let found = two_order_separable_bruteforce(&inst, 6).unwrap().unwrap();
        assert!(separates(&found, &inst).unwrap());
        assert!(two_order_separable_bruteforce(&reduce_nae_to_2order(&NAEFormula::new(3, vec![]).unwrap()), 6).is_err());
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = worked();
        let text = serde_json::to_string(&inst).unwrap();
        assert_eq!(text, r#"{"universe":["u","v","w"],"F":[["u","v","w"]],"G":[["u","v"],["u","w"],["v","w"]]}"#);
        assert_eq!(serde_json::from_str::<SetFamilyInstance>(&text).unwrap(), inst);
        assert!(serde_json::from_str::<SetFamilyInstance>(r#"{"universe":["u"],"F":[[]],"G":[]}"#).is_err());
        assert!(serde_json::from_str::<SetFamilyInstance>(r#"{"universe":["u"],"F":[["q"]],"G":[]}"#).is_err());
    }
}
