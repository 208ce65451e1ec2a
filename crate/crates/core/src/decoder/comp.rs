use super::{AttentionLayer, DecoderMachine, Matrix, OutputMap, PositionalEncoding};
use crate::domain::Domain;
use crate::error::{Error, Result};

/// Six-dimensional one-head decoder for `comp^t_n`.
///
/// Token `xᵢ` for letter value `f(i)` is `(0, cos i, sin i, cos f(i), sin f(i), f(i))`
/// and `y_ℓ = (0, 0, 0, cos f^ℓ(1), sin f^ℓ(1), f^ℓ(1))`. Keys read coordinates
/// 2–3 and queries read 4–5, so the score of `xᵢ` against `y_ℓ` is
/// `cos(i − f^ℓ(1))`, maximal exactly at `i = f^ℓ(1)`. The head's last three
/// coordinates become `y_{ℓ+1}`; `W₁` adds `f^{ℓ+1}(1) ≥ 1` to the cosine and
/// sine so they survive the ReLU, and `W₂` subtracts it again.
pub fn build_comp_decoder(n: usize, t: usize) -> Result<DecoderMachine<f64>> {
    if n == 0 || t == 0 {
        return Err(Error::invalid("n and t must be positive"));
    }
    let domain = Domain::new(vec![n; n], n)?;
    let d = 6;
    let mut k = Matrix::zeros(d, d);
    k.set(0, 1, 1.0);
    k.set(1, 2, 1.0);
    let mut q = Matrix::zeros(d, d);
    q.set(0, 3, 1.0);
    q.set(1, 4, 1.0);
    let mut w_o = Matrix::zeros(d, d);
    for c in 0..3 {
        w_o.set(c, c + 3, 1.0);
    }
    let mut w1 = Matrix::zeros(d, d);
    w1.set(0, 0, 1.0);
    w1.set(0, 2, 1.0);
    w1.set(1, 1, 1.0);
    w1.set(1, 2, 1.0);
    w1.set(2, 2, 1.0);
    let mut w2 = Matrix::zeros(d, d);
    w2.set(3, 0, 1.0);
    w2.set(3, 2, -1.0);
    w2.set(4, 1, 1.0);
    w2.set(4, 2, -1.0);
    w2.set(5, 2, 1.0);
    let layer = AttentionLayer::new(vec![q], vec![k], w_o, w1, w2)?;

    let mut assignments = Vec::with_capacity(n * n);
    for p in 0..n {
        let i = (p + 1) as f64;
        for letter in 0..n {
            let f = (letter + 1) as f64;
            assignments.push(vec![0.0, i.cos(), i.sin(), f.cos(), f.sin(), f]);
        }
    }
    let one = 1f64;
    let encoding = PositionalEncoding {
        assignments,
        eol: vec![0.0, 0.0, 0.0, one.cos(), one.sin(), one],
    };
    DecoderMachine::new(domain, layer, encoding, OutputMap::ReadCoordinate { index: 5, base: 1 }, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{comp_eval, Word};

    #[test]
    fn dimension_six_and_example() {
        let m = build_comp_decoder(5, 2).unwrap();
        assert_eq!(m.d(), 6);
        assert_eq!(m.heads(), 1);
        let w = Word::from_one_based(&[2, 3, 1, 5, 4]);
        let trace = m.run(&w, 2).unwrap();
        assert!((trace.ys[2][5] - 3.0).abs() < 1e-9);
        assert_eq!(m.compute(&w).unwrap() + 1, 3);
    }

    #[test]
    fn identity_word_is_a_fixed_point() {
        for t in 1..=5 {
            let m = build_comp_decoder(4, t).unwrap();
            assert_eq!(m.compute(&Word::from_one_based(&[1, 2, 3, 4])).unwrap(), 0);
        }
    }

    #[test]
    fn scores_are_cosines_of_the_pointer_distance() {
        let m = build_comp_decoder(5, 3).unwrap();
        let w = Word::from_one_based(&[2, 3, 1, 5, 4]);
        let trace = m.run(&w, 3).unwrap();
        for l in 0..3 {
            let target = comp_eval(5, l, &w).unwrap() as f64;
            for i in 0..5 {
                let expect = ((i + 1) as f64 - target).cos();
                assert!((trace.scores[l][0][i] - expect).abs() < 1e-12);
            }
            assert_eq!(trace.heads[l][0] + 1, target as usize);
        }
    }

    #[test]
    fn matches_comp_exhaustively_small() {
        for n in 1..=4 {
            for t in 1..=3 {
                let m = build_comp_decoder(n, t).unwrap();
                for w in m.domain().words() {
                    assert_eq!(m.compute(&w).unwrap() + 1, comp_eval(n, t, &w).unwrap());
                }
            }
        }
    }

    /// Largest losing score `max cos(k)` over pointer distances `1 ≤ k < n`.
    fn runner_up(n: usize) -> f64 {
        (1..n).map(|k| (k as f64).cos()).fold(f64::MIN, f64::max)
    }

    #[test]
    fn score_gap_holds_for_small_n_only() {
        assert!(1.0 - runner_up(32) > 1e-3);
        // integer distances come arbitrarily close to multiples of 2π
        assert!(1.0 - runner_up(1_000_000) < 1e-9);
    }
}
