use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Assignment, Domain, FunctionTable, Word};
use crate::error::{Error, Result};
use crate::trees::DecisionTree;

/// Labelled words over a domain with binary labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SampleRepr", into = "SampleRepr")]
pub struct Sample {
    domain: Domain,
    pairs: Vec<(Word, usize)>,
}

#[derive(Serialize, Deserialize)]
struct SampleRepr {
    sigma_sizes: Vec<usize>,
    pairs: Vec<(Word, usize)>,
}

impl TryFrom<SampleRepr> for Sample {
    type Error = Error;
    fn try_from(r: SampleRepr) -> Result<Self> {
        Sample::new(Domain::new(r.sigma_sizes, 2)?, r.pairs)
    }
}

impl From<Sample> for SampleRepr {
    fn from(s: Sample) -> Self {
        SampleRepr {
            sigma_sizes: s.domain.sigma_sizes().to_vec(),
            pairs: s.pairs,
        }
    }
}

impl Sample {
    /// The domain's output alphabet is replaced by `{0, 1}`.
    pub fn new(domain: Domain, pairs: Vec<(Word, usize)>) -> Result<Self> {
        let domain = domain.with_out_size(2)?;
        for (w, label) in &pairs {
            domain.check_word(w)?;
            if *label > 1 {
                return Err(Error::invalid(format!("label {label} of {w} is not a bit")));
            }
        }
        Ok(Sample { domain, pairs })
    }

    pub fn empty(domain: Domain) -> Result<Self> {
        Sample::new(domain, Vec::new())
    }

    /// Every word of `f`'s domain labelled by `f`, which must be binary.
    pub fn full_table(f: &FunctionTable) -> Result<Self> {
        let pairs = f.domain().words().zip(f.outputs().iter().copied()).collect();
        Sample::new(f.domain().clone(), pairs)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn pairs(&self) -> &[(Word, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Some word carrying both labels, if any.
    pub fn contradiction(&self) -> Option<&Word> {
        let mut seen = std::collections::HashMap::new();
        self.pairs
            .iter()
            .find(|(w, l)| *seen.entry(w).or_insert(*l) != *l)
            .map(|(w, _)| w)
    }

    /// The common label, if all pairs agree (`None` also when empty).
    pub fn constant_label(&self) -> Option<usize> {
        let first = self.pairs.first()?.1;
        self.pairs.iter().all(|(_, l)| *l == first).then_some(first)
    }

    pub fn is_consistent(&self, tree: &DecisionTree) -> Result<bool> {
        for (w, l) in &self.pairs {
            if tree.eval(w)? != *l {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Pairs whose word satisfies / does not satisfy `a`.
    pub fn split(&self, a: Assignment) -> (Sample, Sample) {
        let (with, without) = self.pairs.iter().cloned().partition(|(w, _)| a.consistent(w));
        let part = |pairs| Sample {
            domain: self.domain.clone(),
            pairs,
        };
        (part(with), part(without))
    }
}

/// Pairs of `s` whose word has assignment `a`.
pub fn subsample_with(s: &Sample, a: Assignment) -> Sample {
    s.split(a).0
}

/// Where labels come from.
#[derive(Clone, Debug)]
pub enum Hidden {
    Table(FunctionTable),
    Tree(DecisionTree),
}

impl Hidden {
    fn eval(&self, w: &Word) -> Result<usize> {
        match self {
            Hidden::Table(f) => f.eval_checked(w),
            Hidden::Tree(t) => t.eval(w),
        }
    }

    fn domain(&self) -> &Domain {
        match self {
            Hidden::Table(f) => f.domain(),
            Hidden::Tree(t) => t.domain(),
        }
    }
}

/// Seeded example oracle for a hidden function under a distribution over
/// words: uniform, or weights indexed by the domain's word order.
#[derive(Clone, Debug)]
pub struct SampleSource {
    hidden: Hidden,
    weights: Option<WeightedIndex<f64>>,
    raw_weights: Option<Vec<f64>>,
    rng: ChaCha8Rng,
}

impl SampleSource {
    pub fn uniform(hidden: Hidden, seed: u64) -> Result<Self> {
        if hidden.domain().out_size() > 2 {
            return Err(Error::invalid("sample sources need a binary hidden function"));
        }
        Ok(SampleSource {
            hidden,
            weights: None,
            raw_weights: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn weighted(hidden: Hidden, weights: Vec<f64>, seed: u64) -> Result<Self> {
        let count = hidden.domain().word_count();
        if count != Some(weights.len()) {
            return Err(Error::invalid("one weight per word of the domain is required"));
        }
        let index = WeightedIndex::new(&weights).map_err(|e| Error::invalid(format!("bad weights: {e}")))?;
        let mut src = SampleSource::uniform(hidden, seed)?;
        src.weights = Some(index);
        src.raw_weights = Some(weights);
        Ok(src)
    }

    pub fn domain(&self) -> &Domain {
        self.hidden.domain()
    }

    pub fn draw(&mut self) -> Result<(Word, usize)> {
        let w = match &self.weights {
            Some(index) => self.hidden.domain().decode(index.sample(&mut self.rng)),
            None => {
                let sizes = self.hidden.domain().sigma_sizes();
                Word(sizes.iter().map(|&s| self.rng.gen_range(0..s)).collect())
            }
        };
        let label = self.hidden.eval(&w)?;
        Ok((w, label))
    }

    pub fn draw_sample(&mut self, m: usize) -> Result<Sample> {
        let pairs = (0..m).map(|_| self.draw()).collect::<Result<Vec<_>>>()?;
        Sample::new(self.domain().clone(), pairs)
    }

    /// Exact probability that `tree` disagrees with the hidden function.
    pub fn error_of(&self, tree: &DecisionTree, budget: usize) -> Result<f64> {
        let domain = self.domain();
        let words = domain.words_within(budget)?;
        let total: f64 = match &self.raw_weights {
            Some(w) => w.iter().sum(),
            None => words.len() as f64,
        };
        let mut wrong = 0.0;
        for (i, w) in words.iter().enumerate() {
            if tree.eval(w)? != self.hidden.eval(w)? {
                wrong += self.raw_weights.as_ref().map_or(1.0, |ws| ws[i]);
            }
        }
        Ok(wrong / total)
    }
}
