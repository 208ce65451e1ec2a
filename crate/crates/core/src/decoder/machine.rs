use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::scalar::{leftmost_max, Scalar, TieRule};
use super::AttentionLayer;
use crate::domain::{Domain, Word};
use crate::error::{Error, Result};

/// Vectors for every assignment (by canonical index) and for end-of-line.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionalEncoding<S> {
    pub assignments: Vec<Vec<S>>,
    pub eol: Vec<S>,
}

impl<S: Scalar> PositionalEncoding<S> {
    fn to_json(&self) -> Value {
        let vec = |v: &Vec<S>| v.iter().map(Scalar::to_json).collect::<Vec<_>>();
        json!({
            "assignments": self.assignments.iter().map(vec).collect::<Vec<_>>(),
            "eol": vec(&self.eol),
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let assignments = v
            .get("assignments")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("encoding needs \"assignments\"".into()))?
            .iter()
            .map(vector_from_json)
            .collect::<Result<_>>()?;
        let eol = vector_from_json(v.get("eol").ok_or_else(|| Error::Parse("encoding needs \"eol\"".into()))?)?;
        Ok(PositionalEncoding { assignments, eol })
    }

    fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> PositionalEncoding<T> {
        PositionalEncoding {
            assignments: self.assignments.iter().map(|v| v.iter().map(f).collect()).collect(),
            eol: self.eol.iter().map(f).collect(),
        }
    }
}

fn vector_from_json<S: Scalar>(v: &Value) -> Result<Vec<S>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("expected a vector, found {v}")))?
        .iter()
        .map(S::from_json)
        .collect()
}

/// Maps the final output vector `y_t` to an output letter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMap {
    /// Argmax over coordinates `start..start + lookup.len()`, then
    /// `lookup[argmax]`. Exact ties go to the leftmost coordinate.
    ArgmaxLookup { start: usize, lookup: Vec<usize> },
    /// Coordinate `index` rounded to the nearest integer, minus `base`.
    ReadCoordinate { index: usize, base: i64 },
}

/// Distance from an integer tolerated by [`OutputMap::ReadCoordinate`].
pub const READ_TOLERANCE: f64 = 1e-6;

impl OutputMap {
    pub fn apply<S: Scalar>(&self, y: &[S], out_size: usize, rule: TieRule) -> Result<usize> {
        let letter = match self {
            OutputMap::ArgmaxLookup { start, lookup } => {
                let range = y
                    .get(*start..start + lookup.len())
                    .ok_or_else(|| Error::invalid("output range exceeds the embedding dimension"))?;
                let exact = TieRule { exact: true, ..rule };
                let i = leftmost_max(range, exact).ok_or_else(|| Error::invalid("empty output range"))?;
                if range.iter().any(|x| rule.near_miss(x, &range[i])) {
                    return Err(Error::Ambiguous(format!(
                        "output coordinates within {} of the maximum; use the rational backend",
                        rule.tolerance
                    )));
                }
                lookup[i]
            }
            OutputMap::ReadCoordinate { index, base } => {
                let v = y
                    .get(*index)
                    .ok_or_else(|| Error::invalid("read coordinate exceeds the embedding dimension"))?
                    .to_f64();
                let r = v.round();
                if (v - r).abs() > READ_TOLERANCE {
                    return Err(Error::Ambiguous(format!("coordinate {} holds {v}, not an integer", index + 1)));
                }
                let letter = r as i64 - base;
                if letter < 0 {
                    return Err(Error::Ambiguous(format!("coordinate value {r} is below the output range")));
                }
                letter as usize
            }
        };
        if letter >= out_size {
            return Err(Error::Ambiguous(format!("output letter {letter} outside alphabet of size {out_size}")));
        }
        Ok(letter)
    }

    fn check(&self, d: usize, out_size: usize) -> Result<()> {
        match self {
            OutputMap::ArgmaxLookup { start, lookup } => {
                if lookup.is_empty() || start + lookup.len() > d {
                    return Err(Error::invalid("argmax range must be non-empty and inside the dimension"));
                }
                if lookup.iter().any(|&o| o >= out_size) {
                    return Err(Error::invalid("lookup maps to a letter outside the output alphabet"));
                }
            }
            OutputMap::ReadCoordinate { index, .. } => {
                if *index >= d {
                    return Err(Error::invalid("read coordinate outside the dimension"));
                }
            }
        }
        Ok(())
    }
}

/// A decoder computing a function on a fixed domain in `iterations` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderMachine<S> {
    domain: Domain,
    layer: AttentionLayer<S>,
    encoding: PositionalEncoding<S>,
    output_map: OutputMap,
    iterations: usize,
    ties: TieRule,
}

/// Inputs, outputs and attention details of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderTrace<S> {
    pub xs: Vec<Vec<S>>,
    /// `y₀, …, y_t`
    pub ys: Vec<Vec<S>>,
    /// Attended token per iteration and head; tokens are numbered
    /// `x₁…xₙ, y₀, y₁, …` from 0.
    pub heads: Vec<Vec<usize>>,
    pub scores: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> DecoderMachine<S> {
    pub fn new(
        domain: Domain,
        layer: AttentionLayer<S>,
        encoding: PositionalEncoding<S>,
        output_map: OutputMap,
        iterations: usize,
    ) -> Result<Self> {
        let d = layer.d();
        if iterations == 0 {
            return Err(Error::invalid("machines run at least one iteration"));
        }
        if encoding.assignments.len() != domain.num_assignments() {
            return Err(Error::invalid(format!(
                "encoding covers {} assignments, domain has {}",
                encoding.assignments.len(),
                domain.num_assignments()
            )));
        }
        if encoding.assignments.iter().chain(std::iter::once(&encoding.eol)).any(|v| v.len() != d) {
            return Err(Error::invalid(format!("encoding vectors must have dimension {d}")));
        }
        output_map.check(d, domain.out_size())?;
        Ok(DecoderMachine {
            domain,
            layer,
            encoding,
            output_map,
            iterations,
            ties: TieRule::default(),
        })
    }

    pub fn with_ties(mut self, ties: TieRule) -> Self {
        self.ties = ties;
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn layer(&self) -> &AttentionLayer<S> {
        &self.layer
    }

    pub fn layer_mut(&mut self) -> &mut AttentionLayer<S> {
        &mut self.layer
    }

    pub fn encoding(&self) -> &PositionalEncoding<S> {
        &self.encoding
    }

    pub fn output_map(&self) -> &OutputMap {
        &self.output_map
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn ties(&self) -> TieRule {
        self.ties
    }

    pub fn d(&self) -> usize {
        self.layer.d()
    }

    pub fn heads(&self) -> usize {
        self.layer.heads()
    }

    pub fn input_tokens(&self, w: &Word) -> Result<Vec<Vec<S>>> {
        self.domain.check_word(w)?;
        Ok((0..self.domain.n())
            .map(|p| self.encoding.assignments[self.domain.consistent_index(w, p)].clone())
            .collect())
    }

    pub fn run(&self, w: &Word, t: usize) -> Result<DecoderTrace<S>> {
        if t == 0 {
            return Err(Error::invalid("a run needs t >= 1 iterations"));
        }
        let xs = self.input_tokens(w)?;
        let mut seq = xs.clone();
        seq.push(self.encoding.eol.clone());
        let mut trace = DecoderTrace {
            xs,
            ys: vec![self.encoding.eol.clone()],
            heads: Vec::with_capacity(t),
            scores: Vec::with_capacity(t),
        };
        for _ in 0..t {
            let step = self.layer.step(&seq, self.ties)?;
            seq.push(step.output.clone());
            trace.ys.push(step.output);
            trace.heads.push(step.heads);
            trace.scores.push(step.scores);
        }
        Ok(trace)
    }

    pub fn output(&self, y: &[S]) -> Result<usize> {
        self.output_map.apply(y, self.domain.out_size(), self.ties)
    }

    pub fn compute(&self, w: &Word) -> Result<usize> {
        let trace = self.run(w, self.iterations)?;
        self.output(trace.ys.last().expect("at least one iteration"))
    }

    /// Recomputes every `y_t` of `trace` from its prefix.
    pub fn replay(&self, trace: &DecoderTrace<S>) -> Result<bool> {
        let mut seq = trace.xs.clone();
        for t in 1..trace.ys.len() {
            seq.push(trace.ys[t - 1].clone());
            if self.layer.step(&seq, self.ties)?.output != trace.ys[t] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> DecoderMachine<T> {
        DecoderMachine {
            domain: self.domain.clone(),
            layer: self.layer.map(f),
            encoding: self.encoding.map(f),
            output_map: self.output_map.clone(),
            iterations: self.iterations,
            ties: self.ties,
        }
    }

    pub fn to_float(&self) -> DecoderMachine<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "backend": S::BACKEND,
            "sigma_sizes": self.domain.sigma_sizes(),
            "out_size": self.domain.out_size(),
            "d": self.d(),
            "heads": self.heads(),
            "iterations": self.iterations,
            "tie_tolerance": self.ties.tolerance,
            "exact_ties": self.ties.exact,
            "layer": self.layer.to_json(),
            "encoding": self.encoding.to_json(),
            "output_map": self.output_map,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let backend = v.get("backend").and_then(Value::as_str);
        if backend != Some(S::BACKEND) {
            return Err(Error::Parse(format!("expected backend {:?}, found {backend:?}", S::BACKEND)));
        }
        let field = |key: &str| v.get(key).ok_or_else(|| Error::Parse(format!("machine needs {key:?}")));
        let sigma_sizes: Vec<usize> = serde_json::from_value(field("sigma_sizes")?.clone())?;
        let out_size: usize = serde_json::from_value(field("out_size")?.clone())?;
        let iterations: usize = serde_json::from_value(field("iterations")?.clone())?;
        let output_map: OutputMap = serde_json::from_value(field("output_map")?.clone())?;
        let layer = AttentionLayer::from_json(field("layer")?)?;
        let encoding = PositionalEncoding::from_json(field("encoding")?)?;
        let declared = |key: &str, actual: usize| -> Result<()> {
            match v.get(key).and_then(Value::as_u64) {
                Some(x) if x as usize != actual => Err(Error::Parse(format!("{key} is {x} but the layer has {actual}"))),
                _ => Ok(()),
            }
        };
        declared("d", layer.d())?;
        declared("heads", layer.heads())?;
        let mut ties = TieRule::default();
        if let Some(t) = v.get("tie_tolerance").and_then(Value::as_f64) {
            ties.tolerance = t;
        }
        if let Some(e) = v.get("exact_ties").and_then(Value::as_bool) {
            ties.exact = e;
        }
        let domain = Domain::new(sigma_sizes, out_size)?;
        Ok(DecoderMachine::new(domain, layer, encoding, output_map, iterations)?.with_ties(ties))
    }
}

impl<S: Scalar> DecoderTrace<S> {
    pub fn to_json(&self) -> Value {
        let vec = |v: &Vec<S>| v.iter().map(Scalar::to_json).collect::<Vec<_>>();
        json!({
            "backend": S::BACKEND,
            "xs": self.xs.iter().map(vec).collect::<Vec<_>>(),
            "ys": self.ys.iter().map(vec).collect::<Vec<_>>(),
            "heads": self.heads,
            "scores": self.scores.iter().map(|per_head| per_head.iter().map(vec).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let vectors = |key: &str| -> Result<Vec<Vec<S>>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("trace needs {key:?}")))?
                .iter()
                .map(vector_from_json)
                .collect()
        };
        let heads: Vec<Vec<usize>> =
            serde_json::from_value(v.get("heads").cloned().ok_or_else(|| Error::Parse("trace needs \"heads\"".into()))?)?;
        let scores = v
            .get("scores")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("trace needs \"scores\"".into()))?
            .iter()
            .map(|per_head| {
                per_head
                    .as_array()
                    .ok_or_else(|| Error::Parse("scores are nested lists".into()))?
                    .iter()
                    .map(vector_from_json)
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(DecoderTrace {
            xs: vectors("xs")?,
            ys: vectors("ys")?,
            heads,
            scores,
        })
    }
}

/// A machine of either backend, as read from JSON.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyMachine {
    Rational(DecoderMachine<BigRational>),
    Float(DecoderMachine<f64>),
}

impl AnyMachine {
    pub fn domain(&self) -> &Domain {
        match self {
            AnyMachine::Rational(m) => m.domain(),
            AnyMachine::Float(m) => m.domain(),
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            AnyMachine::Rational(m) => m.iterations(),
            AnyMachine::Float(m) => m.iterations(),
        }
    }

    pub fn compute(&self, w: &Word) -> Result<usize> {
        match self {
            AnyMachine::Rational(m) => m.compute(w),
            AnyMachine::Float(m) => m.compute(w),
        }
    }

    pub fn trace_json(&self, w: &Word, t: usize) -> Result<Value> {
        Ok(match self {
            AnyMachine::Rational(m) => m.run(w, t)?.to_json(),
            AnyMachine::Float(m) => m.run(w, t)?.to_json(),
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyMachine::Rational(m) => m.to_json(),
            AnyMachine::Float(m) => m.to_json(),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v.get("backend").and_then(Value::as_str) {
            Some(<BigRational as Scalar>::BACKEND) => Ok(AnyMachine::Rational(DecoderMachine::from_json(v)?)),
            Some(<f64 as Scalar>::BACKEND) => Ok(AnyMachine::Float(DecoderMachine::from_json(v)?)),
            other => Err(Error::Parse(format!("unknown backend {other:?}"))),
        }
    }
}

impl From<DecoderMachine<BigRational>> for AnyMachine {
    fn from(m: DecoderMachine<BigRational>) -> Self {
        AnyMachine::Rational(m)
    }
}

impl From<DecoderMachine<f64>> for AnyMachine {
    fn from(m: DecoderMachine<f64>) -> Self {
        AnyMachine::Float(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::Matrix;

    #[test]
    fn argmax_lookup_rules() {
        let map = OutputMap::ArgmaxLookup {
            start: 1,
            lookup: vec![2, 0, 1],
        };
        let rule = TieRule::default();
        assert_eq!(map.apply(&[9.0, 0.0, 1.0, 0.0], 3, rule).unwrap(), 0);
        assert_eq!(map.apply(&[9.0, 0.0, 0.0, 0.0], 3, rule).unwrap(), 2);
        let near = map.apply(&[0.0, 1.0, 1.0 + 1e-12, 0.0], 3, rule);
        assert!(matches!(near, Err(Error::Ambiguous(_))));
    }

    #[test]
    fn read_coordinate_rounds_within_tolerance() {
        let map = OutputMap::ReadCoordinate { index: 0, base: 1 };
        let rule = TieRule::default();
        assert_eq!(map.apply(&[3.0000000001], 5, rule).unwrap(), 2);
        assert!(map.apply(&[2.5], 5, rule).is_err());
        assert!(map.apply(&[0.0], 5, rule).is_err());
        assert!(map.apply(&[7.0], 5, rule).is_err());
    }

    #[test]
    fn zeroed_second_matrix_gives_constant_output() {
        let domain = Domain::binary(2, 2).unwrap();
        let d = 3;
        let layer = AttentionLayer::new(
            vec![Matrix::identity(d)],
            vec![Matrix::identity(d)],
            Matrix::identity(d),
            Matrix::identity(d),
            Matrix::zeros(d, d),
        )
        .unwrap();
        let encoding = PositionalEncoding {
            assignments: (0..4).map(|a| vec![a as f64, 1.0, 0.5]).collect(),
            eol: vec![0.0, 0.0, 1.0],
        };
        let map = OutputMap::ArgmaxLookup {
            start: 1,
            lookup: vec![1, 0],
        };
        let m = DecoderMachine::new(domain.clone(), layer, encoding, map, 2).unwrap();
        for w in domain.words() {
            assert_eq!(m.compute(&w).unwrap(), 1);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let domain = Domain::binary(1, 2).unwrap();
        let mut w1 = Matrix::identity(2);
        w1.set(0, 1, BigRational::from_ratio(-1, 3));
        let layer = AttentionLayer::new(
            vec![Matrix::identity(2)],
            vec![Matrix::identity(2)],
            Matrix::identity(2),
            w1,
            Matrix::identity(2),
        )
        .unwrap();
        let encoding = PositionalEncoding {
            assignments: vec![
                vec![BigRational::from_ratio(1, 2), BigRational::from_ratio(0, 1)],
                vec![BigRational::from_ratio(0, 1), BigRational::from_ratio(2, 7)],
            ],
            eol: vec![BigRational::from_ratio(1, 1), BigRational::from_ratio(1, 1)],
        };
        let m = DecoderMachine::new(domain, layer, encoding, OutputMap::ArgmaxLookup { start: 0, lookup: vec![0, 1] }, 1).unwrap();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        let back = AnyMachine::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, AnyMachine::Rational(m.clone()));
        assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), text);

        let trace = m.run(&Word::from_bits("1").unwrap(), 3).unwrap();
        let again = DecoderTrace::<BigRational>::from_json(&trace.to_json()).unwrap();
        assert_eq!(again, trace);
        assert!(m.replay(&again).unwrap());
    }
}
