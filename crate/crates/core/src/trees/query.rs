use crate::domain::{Assignment, Domain, Restriction, Word};
use crate::error::{Error, Result};

/// An a-query `q_τ`: a permutation of the assignment set, stored as canonical
/// assignment indices. Its answer on a word is the first listed assignment
/// consistent with the word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AQuery {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl AQuery {
    pub fn new(domain: &Domain, order: Vec<usize>) -> Result<Self> {
        let size = domain.num_assignments();
        if order.len() != size {
            return Err(Error::invalid(format!(
                "a-query lists {} assignments, domain has {size}",
                order.len()
            )));
        }
        let mut rank = vec![usize::MAX; size];
        for (k, &a) in order.iter().enumerate() {
            if a >= size || rank[a] != usize::MAX {
                return Err(Error::invalid(format!(
                    "a-query order is not a permutation (entry {a})"
                )));
            }
            rank[a] = k;
        }
        Ok(AQuery { order, rank })
    }

    /// Position-major, letter-minor order.
    pub fn canonical(domain: &Domain) -> Self {
        let order: Vec<usize> = (0..domain.num_assignments()).collect();
        AQuery {
            rank: order.clone(),
            order,
        }
    }

    /// The given distinct assignments first, the rest in canonical order.
    pub fn with_prefix(domain: &Domain, prefix: &[usize]) -> Result<Self> {
        let size = domain.num_assignments();
        let mut used = vec![false; size];
        let mut order = Vec::with_capacity(size);
        for &a in prefix {
            if a >= size || used[a] {
                return Err(Error::invalid(format!("prefix entry {a} repeated or out of range")));
            }
            used[a] = true;
            order.push(a);
        }
        order.extend((0..size).filter(|&a| !used[a]));
        AQuery::new(domain, order)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 0-based position of assignment `index` in the order.
    pub fn rank_of(&self, index: usize) -> usize {
        self.rank[index]
    }

    /// Canonical index of `q_τ(w)`.
    pub fn eval(&self, domain: &Domain, w: &Word) -> usize {
        (0..domain.n())
            .map(|p| domain.consistent_index(w, p))
            .min_by_key(|&a| self.rank[a])
            .expect("domains have at least one position")
    }

    pub fn eval_assignment(&self, domain: &Domain, w: &Word) -> Assignment {
        domain.assignment(self.eval(domain, w))
    }

    /// Answers that some word of `state` can produce, each with the
    /// restriction of words producing it, in order of the permutation.
    pub fn answers_within(&self, domain: &Domain, state: &Restriction) -> Vec<(usize, Restriction)> {
        let mut out = Vec::new();
        let mut rest = state.clone();
        for &a in &self.order {
            if rest.is_empty() {
                break;
            }
            let asg = domain.assignment(a);
            if rest.allows(asg) {
                out.push((a, rest.with_yes(asg)));
                rest = rest.with_no(asg);
            }
        }
        out
    }
}

/// An `H`-degree a-query: `H` a-queries answered together as a tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HQuery {
    parts: Vec<AQuery>,
}

impl HQuery {
    pub fn new(parts: Vec<AQuery>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("an H-degree query needs H >= 1 parts"));
        }
        let len = parts[0].len();
        if parts.iter().any(|p| p.len() != len) {
            return Err(Error::invalid("query parts range over different assignment sets"));
        }
        Ok(HQuery { parts })
    }

    pub fn single(q: AQuery) -> Self {
        HQuery { parts: vec![q] }
    }

    pub fn heads(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[AQuery] {
        &self.parts
    }

    pub fn eval(&self, domain: &Domain, w: &Word) -> Vec<usize> {
        self.parts.iter().map(|q| q.eval(domain, w)).collect()
    }

    pub fn eval_assignments(&self, domain: &Domain, w: &Word) -> Vec<Assignment> {
        self.parts
            .iter()
            .map(|q| q.eval_assignment(domain, w))
            .collect()
    }
}

/// Child key text: `"i:σ,j:σ'"` with 1-based positions and 0-based letters.
pub fn key_to_string(domain: &Domain, key: &[usize]) -> String {
    key.iter()
        .map(|&a| {
            let asg = domain.assignment(a);
            format!("{}:{}", asg.position + 1, asg.letter)
        })
        .collect::<Vec<_>>()
        .join(",")
}

pub fn key_from_str(domain: &Domain, text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            let (p, l) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("child key {text:?} is not of the form i:σ")))?;
            let p: usize = p.trim().parse().map_err(|_| Error::Parse(format!("bad position in {text:?}")))?;
            let l: usize = l.trim().parse().map_err(|_| Error::Parse(format!("bad letter in {text:?}")))?;
            if p == 0 {
                return Err(Error::Parse(format!("positions are 1-based in {text:?}")));
            }
            let a = Assignment::new(p - 1, l);
            domain.check_assignment(a)?;
            Ok(domain.assignment_index(a))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(d: &Domain, p: usize, l: usize) -> usize {
        d.assignment_index(Assignment::new(p, l))
    }

    #[test]
    fn aquery_examples() {
        let d = Domain::binary(2, 2).unwrap();
        let w = Word::from_bits("01").unwrap();
        let q = AQuery::new(&d, vec![idx(&d, 0, 0), idx(&d, 1, 0), idx(&d, 0, 1), idx(&d, 1, 1)]).unwrap();
        assert_eq!(q.eval_assignment(&d, &w), Assignment::new(0, 0));
        let q = AQuery::new(&d, vec![idx(&d, 0, 1), idx(&d, 1, 1), idx(&d, 0, 0), idx(&d, 1, 0)]).unwrap();
        assert_eq!(q.eval_assignment(&d, &w), Assignment::new(1, 1));

        // first-one order (1,1),...,(n,1),(1,0),...,(n,0) on 0010
        let d4 = Domain::binary(4, 5).unwrap();
        let mut order: Vec<usize> = (0..4).map(|p| idx(&d4, p, 1)).collect();
        order.extend((0..4).map(|p| idx(&d4, p, 0)));
        let q = AQuery::new(&d4, order).unwrap();
        assert_eq!(q.eval_assignment(&d4, &Word::from_bits("0010").unwrap()), Assignment::new(2, 1));
    }

    #[test]
    fn hquery_examples() {
        let d = Domain::binary(4, 5).unwrap();
        let mut first_one: Vec<usize> = (0..4).map(|p| idx(&d, p, 1)).collect();
        first_one.extend((0..4).map(|p| idx(&d, p, 0)));
        let mut first_zero: Vec<usize> = (0..4).map(|p| idx(&d, p, 0)).collect();
        first_zero.extend((0..4).map(|p| idx(&d, p, 1)));
        let h = HQuery::new(vec![
            AQuery::new(&d, first_one.clone()).unwrap(),
            AQuery::new(&d, first_zero).unwrap(),
        ])
        .unwrap();
        let w = Word::from_bits("0110").unwrap();
        assert_eq!(
            h.eval_assignments(&d, &w),
            vec![Assignment::new(1, 1), Assignment::new(0, 0)]
        );
        let same = HQuery::new(vec![
            AQuery::new(&d, first_one.clone()).unwrap(),
            AQuery::new(&d, first_one).unwrap(),
        ])
        .unwrap();
        for w in d.words() {
            let ans = same.eval(&d, &w);
            assert_eq!(ans[0], ans[1]);
        }
    }

    #[test]
    fn single_head_matches_aquery_everywhere() {
        let domains = [vec![2, 2, 2], vec![3, 2], vec![4, 1, 2], vec![2; 8]];
        for sizes in domains {
            let d = Domain::new(sizes, 2).unwrap();
            let size = d.num_assignments();
            let order: Vec<usize> = (0..size).rev().collect();
            let q = AQuery::new(&d, order).unwrap();
            let h = HQuery::single(q.clone());
            for w in d.words() {
                assert_eq!(h.eval(&d, &w), vec![q.eval(&d, &w)]);
            }
        }
    }

    #[test]
    fn rejects_non_permutations() {
        let d = Domain::binary(2, 2).unwrap();
        assert!(AQuery::new(&d, vec![0, 1, 2]).is_err());
        assert!(AQuery::new(&d, vec![0, 1, 2, 2]).is_err());
        assert!(AQuery::with_prefix(&d, &[3, 3]).is_err());
        assert_eq!(AQuery::with_prefix(&d, &[3, 1]).unwrap().order(), &[3, 1, 0, 2]);
    }

    #[test]
    fn answers_within_partitions_the_state() {
        let d = Domain::new(vec![3, 2], 2).unwrap();
        let q = AQuery::new(&d, vec![4, 1, 0, 3, 2]).unwrap();
        let full = Restriction::full(&d).unwrap();
        let answers = q.answers_within(&d, &full);
        let total: u128 = answers.iter().map(|(_, r)| r.word_count()).sum();
        assert_eq!(total, 6);
        for w in d.words() {
            let a = q.eval(&d, &w);
            let (_, r) = answers.iter().find(|(b, _)| *b == a).unwrap();
            assert!(r.contains(&w));
        }
    }

    #[test]
    fn key_text_round_trip() {
        let d = Domain::new(vec![3, 2], 2).unwrap();
        let key = vec![2, 4];
        let s = key_to_string(&d, &key);
        assert_eq!(s, "1:2,2:1");
        assert_eq!(key_from_str(&d, &s).unwrap(), key);
        assert!(key_from_str(&d, "0:1").is_err());
        assert!(key_from_str(&d, "2:2").is_err());
    }
}
