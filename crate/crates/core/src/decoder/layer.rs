use serde_json::{json, Value};

use super::scalar::{leftmost_max, Scalar, TieRule};
use super::Matrix;
use crate::error::{Error, Result};

/// Single unique-hard-attention layer with `H` heads.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionLayer<S> {
    d: usize,
    q: Vec<Matrix<S>>,
    k: Vec<Matrix<S>>,
    w_o: Matrix<S>,
    w1: Matrix<S>,
    w2: Matrix<S>,
}

/// One layer application with the attention details kept.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerStep<S> {
    pub output: Vec<S>,
    /// Attended token index per head.
    pub heads: Vec<usize>,
    /// Scores over the whole sequence, per head.
    pub scores: Vec<Vec<S>>,
}

impl<S: Scalar> AttentionLayer<S> {
    pub fn new(
        q: Vec<Matrix<S>>,
        k: Vec<Matrix<S>>,
        w_o: Matrix<S>,
        w1: Matrix<S>,
        w2: Matrix<S>,
    ) -> Result<Self> {
        let h = q.len();
        if h == 0 || k.len() != h {
            return Err(Error::invalid("need one query and one key matrix per head, H >= 1"));
        }
        let d = w1.rows();
        let square = |m: &Matrix<S>| m.rows() == d && m.cols() == d;
        if !q.iter().chain(&k).all(square) || !square(&w1) || !square(&w2) {
            return Err(Error::invalid(format!("Q, K, W1, W2 must all be {d}x{d}")));
        }
        if w_o.rows() != d || w_o.cols() != d * h {
            return Err(Error::invalid(format!("W_O must be {d}x{}", d * h)));
        }
        Ok(AttentionLayer { d, q, k, w_o, w1, w2 })
    }

    /// All-zero layer.
    pub fn zeros(d: usize, heads: usize) -> Self {
        AttentionLayer {
            d,
            q: vec![Matrix::zeros(d, d); heads],
            k: vec![Matrix::zeros(d, d); heads],
            w_o: Matrix::zeros(d, d * heads),
            w1: Matrix::zeros(d, d),
            w2: Matrix::zeros(d, d),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn heads(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self, h: usize) -> &Matrix<S> {
        &self.q[h]
    }

    pub fn k(&self, h: usize) -> &Matrix<S> {
        &self.k[h]
    }

    pub fn w_o(&self) -> &Matrix<S> {
        &self.w_o
    }

    pub fn w1(&self) -> &Matrix<S> {
        &self.w1
    }

    pub fn w2(&self) -> &Matrix<S> {
        &self.w2
    }

    pub fn w2_mut(&mut self) -> &mut Matrix<S> {
        &mut self.w2
    }

    pub fn q_mut(&mut self, h: usize) -> &mut Matrix<S> {
        &mut self.q[h]
    }

    /// `Q⁽ʰ⁾ x`
    pub fn query(&self, h: usize, x: &[S]) -> Result<Vec<S>> {
        self.q[h].apply(x)
    }

    /// `⟨K⁽ʰ⁾ x, q⟩` for a precomputed query vector `q`.
    pub fn score_against(&self, h: usize, x: &[S], q: &[S]) -> Result<S> {
        let key = self.k[h].apply(x)?;
        Ok(dot(&key, q))
    }

    /// Scores `⟨K⁽ʰ⁾ xᵢ, Q⁽ʰ⁾ x_m⟩` of every token against the last one.
    pub fn attention_scores(&self, h: usize, seq: &[Vec<S>]) -> Result<Vec<S>> {
        if h >= self.heads() {
            return Err(Error::invalid(format!("head {} of {}", h + 1, self.heads())));
        }
        let last = seq.last().ok_or_else(|| Error::invalid("empty sequence"))?;
        let q = self.query(h, last)?;
        seq.iter().map(|x| self.score_against(h, x, &q)).collect()
    }

    /// `W₂ · ReLU(W₁(W_O · concat(heads) + x_m))`
    pub fn step(&self, seq: &[Vec<S>], rule: TieRule) -> Result<LayerStep<S>> {
        let last = seq.last().ok_or_else(|| Error::invalid("empty sequence"))?;
        let mut heads = Vec::with_capacity(self.heads());
        let mut scores = Vec::with_capacity(self.heads());
        let mut concat = Vec::with_capacity(self.d * self.heads());
        for h in 0..self.heads() {
            let s = self.attention_scores(h, seq)?;
            let i = leftmost_max(&s, rule).expect("non-empty sequence");
            concat.extend_from_slice(&seq[i]);
            heads.push(i);
            scores.push(s);
        }
        let output = self.combine(&concat, last)?;
        Ok(LayerStep { output, heads, scores })
    }

    /// The layer output once the heads are known: `concat` stacks the `H`
    /// attended vectors and `last` is `x_m`.
    pub fn combine(&self, concat: &[S], last: &[S]) -> Result<Vec<S>> {
        let multihead = self.w_o.apply(concat)?;
        let beta: Vec<S> = multihead.iter().zip(last).map(|(a, b)| a.add(b)).collect();
        let hidden: Vec<S> = self.w1.apply(&beta)?.iter().map(Scalar::relu).collect();
        self.w2.apply(&hidden)
    }

    pub fn apply(&self, seq: &[Vec<S>], rule: TieRule) -> Result<Vec<S>> {
        Ok(self.step(seq, rule)?.output)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> AttentionLayer<T> {
        AttentionLayer {
            d: self.d,
            q: self.q.iter().map(|m| m.map(f)).collect(),
            k: self.k.iter().map(|m| m.map(f)).collect(),
            w_o: self.w_o.map(f),
            w1: self.w1.map(f),
            w2: self.w2.map(f),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q.iter().map(Matrix::to_json).collect::<Vec<_>>(),
            "k": self.k.iter().map(Matrix::to_json).collect::<Vec<_>>(),
            "w_o": self.w_o.to_json(),
            "w1": self.w1.to_json(),
            "w2": self.w2.to_json(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let list = |key: &str| -> Result<Vec<Matrix<S>>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("layer needs a list {key:?}")))?
                .iter()
                .map(Matrix::from_json)
                .collect()
        };
        let one = |key: &str| -> Result<Matrix<S>> {
            Matrix::from_json(v.get(key).ok_or_else(|| Error::Parse(format!("layer needs {key:?}")))?)
        };
        AttentionLayer::new(list("q")?, list("k")?, one("w_o")?, one("w1")?, one("w2")?)
    }
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        S::mul_add_to(&mut acc, x, y);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_layer(d: usize) -> AttentionLayer<f64> {
        AttentionLayer::new(
            vec![Matrix::identity(d)],
            vec![Matrix::identity(d)],
            Matrix::identity(d),
            Matrix::identity(d),
            Matrix::identity(d),
        )
        .unwrap()
    }

    #[test]
    fn zero_layer_gives_zero_scores_and_output() {
        let l: AttentionLayer<f64> = AttentionLayer::zeros(2, 1);
        let seq = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(l.attention_scores(0, &seq).unwrap(), vec![0.0, 0.0]);
        assert_eq!(l.apply(&seq, TieRule::default()).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_example() {
        let l = identity_layer(2);
        let seq = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(l.attention_scores(0, &seq).unwrap(), vec![0.0, 1.0]);
        let step = l.step(&seq, TieRule::default()).unwrap();
        assert_eq!(step.heads, vec![1]);
        assert_eq!(step.output, vec![0.0, 2.0]);
    }

    #[test]
    fn ties_go_to_the_leftmost_token() {
        let l = identity_layer(2);
        let seq = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let step = l.step(&seq, TieRule::default()).unwrap();
        assert_eq!(step.heads, vec![0]);
    }

    #[test]
    fn shapes_are_checked() {
        let bad = AttentionLayer::new(
            vec![Matrix::<f64>::identity(2)],
            vec![Matrix::identity(3)],
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::identity(2),
        );
        assert!(bad.is_err());
        let l = identity_layer(2);
        assert!(l.attention_scores(0, &[vec![1.0]]).is_err());
        assert!(l.attention_scores(1, &[vec![1.0, 0.0]]).is_err());
    }
}
