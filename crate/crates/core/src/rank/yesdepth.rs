use super::RankCertificate;
use crate::domain::{Assignment, Budget, Domain, FunctionTable, Word};
use crate::error::{Error, Result};
use crate::trees::{YesNoNode, YesNoTree};

const UNKNOWN: u8 = u8::MAX;
const NOT_CONSTANT: u32 = 1;

/// Rank as the value of the YES-NO game
/// `val(S) = 0` if `f` is constant on `S`, else
/// `min_a max(1 + val(S ∧ a), val(S ∧ ¬a))` over splitting questions `a`.
///
/// States are products of non-empty letter sets, one per position, so the
/// memo tables have `Π (2^|Σᵢ| − 1)` entries and must fit the search budget.
pub fn rank_exact_yesdepth(f: &FunctionTable, budget: Budget) -> Result<RankCertificate> {
    let mut game = Game::new(f, budget)?;
    let mut masks = game.full.clone();
    let value = game.value(&mut masks) as usize;
    let root = game.witness(&mut masks);
    let witness = YesNoTree::new(f.domain().clone(), root)?.to_aquery()?;
    debug_assert_eq!(witness.depth(), value);
    Ok(RankCertificate {
        value,
        exhausted: true,
        witness,
    })
}

struct Game<'a> {
    f: &'a FunctionTable,
    domain: &'a Domain,
    full: Vec<u64>,
    radix: Vec<usize>,
    /// 0 unknown, 1 not constant, `o + 2` constant `o`.
    constant: Vec<u32>,
    value: Vec<u8>,
}

impl<'a> Game<'a> {
    fn new(f: &'a FunctionTable, budget: Budget) -> Result<Self> {
        let domain = f.domain();
        let mut states: u128 = 1;
        for &s in domain.sigma_sizes() {
            let sets = if s >= 64 { u128::MAX } else { (1u128 << s) - 1 };
            states = states.saturating_mul(sets);
        }
        if states > budget.search_states as u128 {
            return Err(Error::resource("YES-NO game states", states, budget.search_states as u128));
        }
        let n = domain.n();
        let mut radix = vec![1usize; n];
        for p in (0..n.saturating_sub(1)).rev() {
            radix[p] = radix[p + 1] * ((1usize << domain.sigma_size(p + 1)) - 1);
        }
        let full = domain.sigma_sizes().iter().map(|&s| (1u64 << s) - 1).collect();
        Ok(Game {
            f,
            domain,
            full,
            radix,
            constant: vec![0; states as usize],
            value: vec![UNKNOWN; states as usize],
        })
    }

    fn index(&self, masks: &[u64]) -> usize {
        masks.iter().zip(&self.radix).map(|(&m, &r)| (m as usize - 1) * r).sum()
    }

    fn constant(&mut self, masks: &mut [u64]) -> Option<usize> {
        let idx = self.index(masks);
        match self.constant[idx] {
            0 => {}
            NOT_CONSTANT => return None,
            c => return Some(c as usize - 2),
        }
        let result = match masks.iter().position(|m| m.count_ones() > 1) {
            None => {
                let word = Word::new(masks.iter().map(|m| m.trailing_zeros() as usize).collect());
                Some(self.f.output_at(self.domain.encode(&word)))
            }
            Some(p) => {
                let orig = masks[p];
                let low = orig & orig.wrapping_neg();
                masks[p] = low;
                let first = self.constant(masks);
                let result = match first {
                    Some(_) => {
                        masks[p] = orig & !low;
                        let second = self.constant(masks);
                        if first == second {
                            first
                        } else {
                            None
                        }
                    }
                    None => None,
                };
                masks[p] = orig;
                result
            }
        };
        self.constant[idx] = result.map_or(NOT_CONSTANT, |o| o as u32 + 2);
        result
    }

    /// Value of the state and the lowest canonical question achieving it.
    fn solve(&mut self, masks: &mut [u64]) -> (u8, Option<Assignment>) {
        if self.constant(masks).is_some() {
            return (0, None);
        }
        let mut best = (UNKNOWN, None);
        'outer: for p in 0..masks.len() {
            let orig = masks[p];
            if orig.count_ones() < 2 {
                continue;
            }
            for letter in 0..64 {
                if orig >> letter & 1 == 0 {
                    continue;
                }
                masks[p] = 1 << letter;
                let yes = self.value(masks);
                masks[p] = orig & !(1 << letter);
                let no = self.value(masks);
                masks[p] = orig;
                let v = (yes + 1).max(no);
                if v < best.0 {
                    best = (v, Some(Assignment::new(p, letter)));
                    if v == 1 {
                        break 'outer;
                    }
                }
            }
        }
        best
    }

    fn value(&mut self, masks: &mut [u64]) -> u8 {
        let idx = self.index(masks);
        if self.value[idx] == UNKNOWN {
            self.value[idx] = self.solve(masks).0;
        }
        self.value[idx]
    }

    fn witness(&mut self, masks: &mut [u64]) -> YesNoNode {
        if let Some(o) = self.constant(masks) {
            return YesNoNode::Leaf(o);
        }
        let a = self.solve(masks).1.expect("non-constant states have a splitting question");
        let orig = masks[a.position];
        masks[a.position] = 1 << a.letter;
        let yes = self.witness(masks);
        masks[a.position] = orig & !(1 << a.letter);
        let no = self.witness(masks);
        masks[a.position] = orig;
        YesNoNode::question(a, yes, no)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_one_table, DEFAULT_BUDGET};

    fn binary_table(n: usize, outputs: Vec<usize>) -> FunctionTable {
        FunctionTable::new(Domain::binary(n, 2).unwrap(), outputs).unwrap()
    }

    #[test]
    fn constant_has_rank_zero() {
        let f = binary_table(3, vec![1; 8]);
        let c = rank_exact_yesdepth(&f, Budget::default()).unwrap();
        assert_eq!(c.value, 0);
        assert!(c.verify(&f, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn xor_has_rank_two() {
        let f = binary_table(2, vec![0, 1, 1, 0]);
        let c = rank_exact_yesdepth(&f, Budget::default()).unwrap();
        assert_eq!(c.value, 2);
        assert!(c.exhausted);
        assert!(c.verify(&f, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn one_two_six_has_rank_two() {
        let f = build_one_table(6, 2, DEFAULT_BUDGET).unwrap();
        let c = rank_exact_yesdepth(&f, Budget::default()).unwrap();
        assert_eq!(c.value, 2);
        assert!(c.verify(&f, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn state_space_respects_budget() {
        let f = build_one_table(8, 1, DEFAULT_BUDGET).unwrap();
        let err = rank_exact_yesdepth(&f, Budget::uniform(1000)).unwrap_err();
        assert_eq!(err, Error::resource("YES-NO game states", 6561, 1000));
    }

    #[test]
    fn witnesses_have_the_value_as_depth() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for sizes in [vec![3, 2], vec![2, 2, 2], vec![3, 3], vec![4, 1, 2]] {
            let d = Domain::new(sizes, 3).unwrap();
            for _ in 0..30 {
                let outputs = (0..d.word_count().unwrap()).map(|_| rng.gen_range(0..3)).collect();
                let f = FunctionTable::new(d.clone(), outputs).unwrap();
                let c = rank_exact_yesdepth(&f, Budget::default()).unwrap();
                assert!(c.verify(&f, DEFAULT_BUDGET).unwrap());
            }
        }
    }
}
