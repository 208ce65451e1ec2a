use rand::Rng;

use crate::error::{Error, Result};

fn inverse(perm: &[usize]) -> Result<Vec<usize>> {
    let mut inv = vec![usize::MAX; perm.len()];
    for (k, &e) in perm.iter().enumerate() {
        if e >= perm.len() || inv[e] != usize::MAX {
            return Err(Error::invalid(format!("not a permutation of 0..{}", perm.len())));
        }
        inv[e] = k;
    }
    Ok(inv)
}

fn isqrt(m: usize) -> usize {
    let mut r = (m as f64).sqrt() as usize;
    while r * r > m {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= m {
        r += 1;
    }
    r
}

/// `τ` is close to `γ` when `γ⁻¹(τ(j)) ≤ j + √|B|` for every `j`.
///
/// Both are orders on `B = {0, …, m−1}` listed first to last. The square root
/// is never formed: a later position `p > j` is allowed iff `(p − j)² ≤ |B|`.
pub fn is_close(tau: &[usize], gamma: &[usize]) -> Result<bool> {
    if tau.len() != gamma.len() {
        return Err(Error::invalid("permutations of different sets"));
    }
    inverse(tau)?;
    let gamma_inv = inverse(gamma)?;
    let m = tau.len();
    Ok(tau.iter().enumerate().all(|(j, &e)| {
        let p = gamma_inv[e];
        p <= j || (p - j) * (p - j) <= m
    }))
}

/// An element in the first half of every `τₛ`, the `γ`-earliest such one.
///
/// Each close `τ` puts its first `⌊m/2⌋` elements among the first
/// `⌊m/2⌋ + ⌊√m⌋` of `γ`, so once `h·⌊m/2⌋ > (h−1)(⌊m/2⌋ + ⌊√m⌋)` some element
/// is marked by all `h` of them. Below that threshold `None` is possible.
pub fn common_top_element(gamma: &[usize], taus: &[Vec<usize>]) -> Result<Option<usize>> {
    let m = gamma.len();
    inverse(gamma)?;
    let mut marks = vec![0usize; m];
    for (s, tau) in taus.iter().enumerate() {
        if !is_close(tau, gamma)? {
            return Err(Error::invalid(format!("permutation {} is far from gamma", s + 1)));
        }
        for &e in &tau[..m / 2] {
            marks[e] += 1;
        }
    }
    Ok(gamma.iter().copied().find(|&e| marks[e] == taus.len()))
}

/// Whether the marking argument guarantees a common top element.
pub fn lemma_threshold_holds(m: usize, h: usize) -> bool {
    let half = m / 2;
    h == 0 || h * half > (h - 1) * (half + isqrt(m))
}

/// Random order close to `γ`: sort by `γ`-position plus a uniform integer
/// offset in `0..=⌊√m⌋`, ties going to the `γ`-earlier element.
pub fn random_close_permutation<R: Rng + ?Sized>(gamma: &[usize], rng: &mut R) -> Vec<usize> {
    let s = isqrt(gamma.len());
    let mut keyed: Vec<(usize, usize, usize)> = gamma
        .iter()
        .enumerate()
        .map(|(p, &e)| (p + rng.gen_range(0..=s), p, e))
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, _, e)| e).collect()
}
