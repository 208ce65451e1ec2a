//! Finite input domains `Σ₁ × … × Σₙ → O`, words, assignments and dense
//! function tables.
//!
//! Letters are 0-based indices into their alphabet everywhere in the library
//! and in JSON. Positions are 0-based in the API and 1-based whenever they are
//! displayed or written as tree child keys. The built-in families interpret a
//! letter `σ` of the iterated-composition domain as the value `σ + 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of entries of a dense table or search state space.
pub const DEFAULT_BUDGET: usize = 1 << 20;

/// Budgets for dense tables and exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub table_entries: usize,
    pub search_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            table_entries: DEFAULT_BUDGET,
            search_states: DEFAULT_BUDGET,
        }
    }
}

impl Budget {
    pub fn uniform(limit: usize) -> Self {
        Budget {
            table_entries: limit,
            search_states: limit,
        }
    }

    /// Reads `RANKCOT_BUDGET` (a positive integer) if set, else the defaults.
    pub fn from_env() -> Result<Self> {
        match std::env::var("RANKCOT_BUDGET") {
            Ok(v) => {
                let limit: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("RANKCOT_BUDGET={v:?} is not a count")))?;
                if limit == 0 {
                    return Err(Error::invalid("RANKCOT_BUDGET must be positive"));
                }
                Ok(Budget::uniform(limit))
            }
            Err(_) => Ok(Budget::default()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    /// 0-based position.
    pub position: usize,
    pub letter: usize,
}

impl Assignment {
    pub fn new(position: usize, letter: usize) -> Self {
        Assignment { position, letter }
    }

    /// Is this assignment consistent with `w`, i.e. does `w` hold `letter` at `position`?
    pub fn consistent(&self, w: &Word) -> bool {
        w.0.get(self.position) == Some(&self.letter)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.position + 1, self.letter)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    /// Builds a word from the 1-based values `1..=|Σ|`.
    pub fn from_one_based(values: &[usize]) -> Self {
        Word(values.iter().map(|&v| v - 1).collect())
    }

    /// Parses a string of binary digits such as `"0101"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        bits.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("not a bit string: {bits:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Alphabet sizes `|Σ₁|, …, |Σₙ|` and the output alphabet size `|O|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub struct Domain {
    sigma_sizes: Vec<usize>,
    out_size: usize,
    offsets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DomainRepr {
    sigma_sizes: Vec<usize>,
    out_size: usize,
}

impl TryFrom<DomainRepr> for Domain {
    type Error = Error;
    fn try_from(r: DomainRepr) -> Result<Self> {
        Domain::new(r.sigma_sizes, r.out_size)
    }
}

impl From<Domain> for DomainRepr {
    fn from(d: Domain) -> Self {
        DomainRepr {
            sigma_sizes: d.sigma_sizes,
            out_size: d.out_size,
        }
    }
}

impl Domain {
    pub fn new(sigma_sizes: Vec<usize>, out_size: usize) -> Result<Self> {
        if sigma_sizes.is_empty() {
            return Err(Error::invalid("a domain needs at least one position"));
        }
        if sigma_sizes.contains(&0) {
            return Err(Error::invalid("alphabet sizes must be at least 1"));
        }
        if out_size == 0 {
            return Err(Error::invalid("output alphabet must be non-empty"));
        }
        let mut offsets = Vec::with_capacity(sigma_sizes.len() + 1);
        let mut acc = 0;
        for &s in &sigma_sizes {
            offsets.push(acc);
            acc += s;
        }
        offsets.push(acc);
        Ok(Domain {
            sigma_sizes,
            out_size,
            offsets,
        })
    }

    pub fn binary(n: usize, out_size: usize) -> Result<Self> {
        Domain::new(vec![2; n], out_size)
    }

    pub fn n(&self) -> usize {
        self.sigma_sizes.len()
    }

    pub fn sigma_sizes(&self) -> &[usize] {
        &self.sigma_sizes
    }

    pub fn sigma_size(&self, position: usize) -> usize {
        self.sigma_sizes[position]
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    pub fn with_out_size(&self, out_size: usize) -> Result<Self> {
        Domain::new(self.sigma_sizes.clone(), out_size)
    }

    pub fn is_binary(&self) -> bool {
        self.sigma_sizes.iter().all(|&s| s == 2)
    }

    /// `|A| = Σᵢ |Σᵢ|`.
    pub fn num_assignments(&self) -> usize {
        self.offsets[self.n()]
    }

    /// Canonical index: position-major, letter-minor.
    pub fn assignment_index(&self, a: Assignment) -> usize {
        self.offsets[a.position] + a.letter
    }

    pub fn assignment(&self, index: usize) -> Assignment {
        let position = self.offsets.partition_point(|&o| o <= index) - 1;
        Assignment::new(position, index - self.offsets[position])
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        (0..self.n()).flat_map(move |p| (0..self.sigma_sizes[p]).map(move |l| Assignment::new(p, l)))
    }

    pub fn check_assignment(&self, a: Assignment) -> Result<()> {
        if a.position >= self.n() || a.letter >= self.sigma_sizes[a.position] {
            return Err(Error::invalid(format!("assignment {a} outside the domain")));
        }
        Ok(())
    }

    /// Index of the assignment consistent with `w` at `position`.
    pub fn consistent_index(&self, w: &Word, position: usize) -> usize {
        self.offsets[position] + w.0[position]
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        if w.len() != self.n() {
            return Err(Error::invalid(format!(
                "word {w} has length {}, domain has {} positions",
                w.len(),
                self.n()
            )));
        }
        for (i, (&l, &s)) in w.0.iter().zip(&self.sigma_sizes).enumerate() {
            if l >= s {
                return Err(Error::invalid(format!(
                    "letter {l} at position {} outside alphabet of size {s}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// `|Σ₁|·…·|Σₙ|`, or `None` on overflow.
    pub fn word_count(&self) -> Option<usize> {
        self.sigma_sizes
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
    }

    pub fn word_count_within(&self, budget: usize) -> Result<usize> {
        match self.word_count() {
            Some(c) if c <= budget => Ok(c),
            Some(c) => Err(Error::resource("word table", c as u128, budget as u128)),
            None => Err(Error::resource("word table", u128::MAX, budget as u128)),
        }
    }

    /// Mixed-radix index, position 1 most significant.
    pub fn encode(&self, w: &Word) -> usize {
        w.0.iter()
            .zip(&self.sigma_sizes)
            .fold(0, |acc, (&l, &s)| acc * s + l)
    }

    pub fn decode(&self, mut index: usize) -> Word {
        let mut letters = vec![0; self.n()];
        for i in (0..self.n()).rev() {
            let s = self.sigma_sizes[i];
            letters[i] = index % s;
            index /= s;
        }
        Word(letters)
    }

    /// All words in mixed-radix order. The caller is responsible for the budget.
    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        let count = self.word_count().unwrap_or(usize::MAX);
        (0..count).map(move |i| self.decode(i))
    }

    pub fn words_within(&self, budget: usize) -> Result<Vec<Word>> {
        let count = self.word_count_within(budget)?;
        Ok((0..count).map(|i| self.decode(i)).collect())
    }
}

pub fn consistent(domain: &Domain, a: Assignment, w: &Word) -> Result<bool> {
    domain.check_assignment(a)?;
    domain.check_word(w)?;
    Ok(a.consistent(w))
}

/// A total function given by its dense table of outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct FunctionTable {
    domain: Domain,
    outputs: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    sigma_sizes: Vec<usize>,
    out_size: usize,
    outputs: Vec<usize>,
}

impl TryFrom<TableRepr> for FunctionTable {
    type Error = Error;
    fn try_from(r: TableRepr) -> Result<Self> {
        FunctionTable::new(Domain::new(r.sigma_sizes, r.out_size)?, r.outputs)
    }
}

impl From<FunctionTable> for TableRepr {
    fn from(t: FunctionTable) -> Self {
        TableRepr {
            sigma_sizes: t.domain.sigma_sizes.clone(),
            out_size: t.domain.out_size,
            outputs: t.outputs,
        }
    }
}

impl FunctionTable {
    pub fn new(domain: Domain, outputs: Vec<usize>) -> Result<Self> {
        let expected = domain
            .word_count()
            .ok_or_else(|| Error::invalid("domain too large for a table"))?;
        if outputs.len() != expected {
            return Err(Error::invalid(format!(
                "table has {} entries, domain has {expected} words",
                outputs.len()
            )));
        }
        if let Some(&o) = outputs.iter().find(|&&o| o >= domain.out_size()) {
            return Err(Error::invalid(format!(
                "output {o} outside output alphabet of size {}",
                domain.out_size()
            )));
        }
        Ok(FunctionTable { domain, outputs })
    }

    pub fn from_fn(domain: Domain, budget: usize, f: impl Fn(&Word) -> usize) -> Result<Self> {
        let count = domain.word_count_within(budget)?;
        let outputs = (0..count).map(|i| f(&domain.decode(i))).collect();
        FunctionTable::new(domain, outputs)
    }

    /// Fallible variant of [`FunctionTable::from_fn`].
    pub fn try_from_fn(
        domain: Domain,
        budget: usize,
        f: impl Fn(&Word) -> Result<usize>,
    ) -> Result<Self> {
        let count = domain.word_count_within(budget)?;
        let outputs = (0..count)
            .map(|i| f(&domain.decode(i)))
            .collect::<Result<Vec<_>>>()?;
        FunctionTable::new(domain, outputs)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn eval(&self, w: &Word) -> usize {
        self.outputs[self.domain.encode(w)]
    }

    pub fn eval_checked(&self, w: &Word) -> Result<usize> {
        self.domain.check_word(w)?;
        Ok(self.eval(w))
    }

    pub fn output_at(&self, index: usize) -> usize {
        self.outputs[index]
    }

    pub fn is_constant(&self) -> bool {
        self.outputs.windows(2).all(|p| p[0] == p[1])
    }
}

/// `f⁽ᵗ⁾(1)` where `f(i)` is the value of the `i`-th letter. Letters are
/// 0-based, so letter `σ` stands for the value `σ + 1`; the result is the
/// 1-based value.
pub fn comp_eval(n: usize, t: usize, w: &Word) -> Result<usize> {
    if w.len() != n {
        return Err(Error::invalid(format!("comp word must have {n} letters")));
    }
    if let Some(&l) = w.0.iter().find(|&&l| l >= n) {
        return Err(Error::invalid(format!("letter value {} outside [1, {n}]", l + 1)));
    }
    let mut value = 1;
    for _ in 0..t {
        value = w.0[value - 1] + 1;
    }
    Ok(value)
}

/// Position (1-based) of the `k`-th one of a binary word, or `n + 1`.
pub fn one_eval(k: usize, w: &Word) -> Result<usize> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if w.0.iter().any(|&b| b > 1) {
        return Err(Error::invalid("one^k needs a binary word"));
    }
    let mut seen = 0;
    for (i, &b) in w.0.iter().enumerate() {
        seen += b;
        if seen == k {
            return Ok(i + 1);
        }
    }
    Ok(w.len() + 1)
}

/// `comp^t_n : [n]ⁿ → [n]`; output letter `v − 1` encodes value `v`.
pub fn build_comp_table(n: usize, t: usize, budget: usize) -> Result<FunctionTable> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let domain = Domain::new(vec![n; n], n)?;
    FunctionTable::try_from_fn(domain, budget, |w| comp_eval(n, t, w).map(|v| v - 1))
}

/// `one^k_n : {0,1}ⁿ → [n+1]`; output letter `p − 1` encodes position `p`.
pub fn build_one_table(n: usize, k: usize, budget: usize) -> Result<FunctionTable> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let domain = Domain::binary(n, n + 1)?;
    FunctionTable::try_from_fn(domain, budget, |w| one_eval(k, w).map(|p| p - 1))
}

/// A product of non-empty per-position letter sets, stored as bitmasks.
///
/// Every set of words reachable by answering assignment questions (YES pins a
/// letter, NO removes one) is of this form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Restriction {
    masks: Vec<u64>,
}

impl Restriction {
    pub const MAX_ALPHABET: usize = 64;

    pub fn full(domain: &Domain) -> Result<Self> {
        let masks = domain
            .sigma_sizes()
            .iter()
            .map(|&s| {
                if s > Self::MAX_ALPHABET {
                    Err(Error::UnsupportedDomain(format!(
                        "alphabets larger than {} letters",
                        Self::MAX_ALPHABET
                    )))
                } else if s == 64 {
                    Ok(u64::MAX)
                } else {
                    Ok((1u64 << s) - 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Restriction { masks })
    }

    pub fn from_masks(masks: Vec<u64>) -> Self {
        Restriction { masks }
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn mask(&self, position: usize) -> u64 {
        self.masks[position]
    }

    pub fn is_empty(&self) -> bool {
        self.masks.contains(&0)
    }

    pub fn allows(&self, a: Assignment) -> bool {
        self.masks[a.position] >> a.letter & 1 == 1
    }

    /// `a` holds on every word of the restriction.
    pub fn forces(&self, a: Assignment) -> bool {
        self.masks[a.position] == 1u64 << a.letter
    }

    pub fn contains(&self, w: &Word) -> bool {
        w.0.iter().zip(&self.masks).all(|(&l, &m)| m >> l & 1 == 1)
    }

    pub fn with_yes(&self, a: Assignment) -> Self {
        let mut masks = self.masks.clone();
        masks[a.position] &= 1u64 << a.letter;
        Restriction { masks }
    }

    pub fn with_no(&self, a: Assignment) -> Self {
        let mut masks = self.masks.clone();
        masks[a.position] &= !(1u64 << a.letter);
        Restriction { masks }
    }

    pub fn word_count(&self) -> u128 {
        self.masks.iter().map(|m| m.count_ones() as u128).product()
    }
}
