use super::{ceil_log2, push_uint, read_uint, Party, PositionSplit, Protocol};
use crate::domain::{Domain, Word};
use crate::error::{Error, Result};

/// Pointer chasing over `fa, fb : [m] → [m]` (1-based values): start at 1
/// on Alice's side and apply `fa`, `fb`, `fa`, … `t` times. Returns the
/// final pointer as a position of the embedded word, `1..=2m`.
pub fn pointer_chase(fa: &[usize], fb: &[usize], t: usize) -> Result<usize> {
    check_maps(fa, fb)?;
    let m = fa.len();
    let mut x = 1;
    for step in 0..t {
        x = if step % 2 == 0 { fa[x - 1] } else { fb[x - 1] };
    }
    Ok(if t % 2 == 1 { x + m } else { x })
}

/// Word `w ∈ [2m]^{2m}` with `w_i = fa(i) + m` and `w_{m+i} = fb(i)`, so
/// that `comp^t_{2m}(w)` is the `t`-step pointer chase; Alice holds the
/// first half. Letters are 0-based.
pub fn embed_pointer_chasing(fa: &[usize], fb: &[usize]) -> Result<(Word, PositionSplit)> {
    check_maps(fa, fb)?;
    let m = fa.len();
    let values: Vec<usize> = fa.iter().map(|&v| v + m).chain(fb.iter().copied()).collect();
    Ok((Word::from_one_based(&values), PositionSplit::prefix(2 * m, m)?))
}

fn check_maps(fa: &[usize], fb: &[usize]) -> Result<()> {
    let m = fa.len();
    if m == 0 || fb.len() != m {
        return Err(Error::invalid("pointer chasing needs two maps on the same non-empty [m]"));
    }
    if fa.iter().chain(fb).any(|&v| v == 0 || v > m) {
        return Err(Error::invalid(format!("map values must lie in [1, {m}]")));
    }
    Ok(())
}

/// Two-round protocol for `one^k_n`: `first` sends the positions of its
/// first `k` ones, the other party merges them with its own and sends the
/// `k`-th smallest. Each field is `⌈log₂(n+1)⌉` bits holding a position
/// `p` as `p − 1`, with `n` standing for "none" (position `n + 1`). Outputs
/// are letters of the `one^k_n` table.
pub fn one_k_two_round(n: usize, k: usize, split: &PositionSplit, first: Party) -> Result<Protocol> {
    if n == 0 || k == 0 {
        return Err(Error::invalid("n and k must be positive"));
    }
    let width = ceil_log2(n + 1);
    let fields = vec![vec![width; k]; 2];
    let kth = move |ones: &mut Vec<usize>| {
        ones.sort_unstable();
        ones.get(k - 1).copied().unwrap_or(n)
    };
    Protocol::new(
        Domain::binary(n, n + 1)?,
        split.clone(),
        first,
        fields,
        move |round, so_far, view| {
            let mut ones: Vec<usize> = view.own().filter(|&(_, l)| l == 1).map(|(p, _)| p).collect();
            let mut bits = Vec::with_capacity(k * width);
            if round == 0 {
                ones.truncate(k);
                for i in 0..k {
                    push_uint(&mut bits, ones.get(i).copied().unwrap_or(n) as u64, width);
                }
            } else {
                ones.extend((0..k).map(|i| read_uint(so_far, i * width, width) as usize).filter(|&p| p < n));
                let answer = kth(&mut ones);
                // Later fields repeat the answer so every message is k fields.
                for _ in 0..k {
                    push_uint(&mut bits, answer as u64, width);
                }
            }
            Ok(bits)
        },
        move |bits| Ok(read_uint(bits, k * width, width) as usize),
    )
}
