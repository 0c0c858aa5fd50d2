//! Recovering the oracle prefix from a uniquely yielding functional's output
//! by bounded search.

use std::collections::BTreeMap;

use crate::bound::BoundSpec;
use crate::functional::{run, Oracle, Status, TuringFunctional};
use crate::seq::{Str, Symbol};

use super::ReductionError;

/// Candidate oracles the brute-force search may run before giving up.
pub const BRUTE_FORCE_GUARD: u64 = 1 << 24;

fn prepare(
    phi: &TuringFunctional,
    target: &Str,
    n: usize,
    bound: &BoundSpec,
    max_len: usize,
) -> Result<usize, ReductionError> {
    phi.alphabet().check_same(target.alphabet())?;
    let m = bound.eval(n as u64) as usize;
    if target.len() < m {
        return Err(ReductionError::BadArgs(format!(
            "target has {} symbols, bound({n}) = {m}",
            target.len()
        )));
    }
    if max_len < n {
        return Err(ReductionError::BadArgs(format!("max_len {max_len} is below n = {n}")));
    }
    Ok(m)
}

/// `Γ^T(n)`: the first `x` in length-then-lexicographic order with
/// `n <= |x| <= max_len` and `Φ^x(m(n)) = T↾m(n)`, truncated to `n`.
pub fn invert_uyb(
    phi: &TuringFunctional,
    target: &Str,
    n: usize,
    bound: &BoundSpec,
    max_len: usize,
    budget: u64,
) -> Result<Str, ReductionError> {
    let m = prepare(phi, target, n, bound, max_len)?;
    let want = target.truncated(m);
    let alphabet = phi.alphabet();
    let k = alphabet.size();
    let mut tried = 0u64;
    for len in n..=max_len {
        let mut x = vec![0 as Symbol; len];
        loop {
            tried += 1;
            if tried > BRUTE_FORCE_GUARD {
                return Err(ReductionError::GuardExceeded { k, cap: len });
            }
            let cand = Str::new(alphabet, x.clone())?;
            if let Status::Halt(out) = run(phi, Oracle::Str(&cand), m, budget)?.status {
                if out == want {
                    return Ok(cand.truncated(n));
                }
            }
            if !increment(&mut x, k) {
                break;
            }
        }
    }
    Err(ReductionError::NotFound { n, max_len })
}

/// Lexicographic successor; false on wrap-around.
fn increment(x: &mut [Symbol], k: usize) -> bool {
    for s in x.iter_mut().rev() {
        if (*s as usize) + 1 < k {
            *s += 1;
            return true;
        }
        *s = 0;
    }
    false
}

/// Transducer fast path for [`invert_uyb`] with the same answer.
///
/// Walks inputs depth by depth over nodes (state, matched output), keeping
/// the lexicographically least input reaching each node; inputs whose output
/// already covers `T↾m(n)` collapse into one absorbing node.
pub fn invert_uyb_fast(
    phi: &TuringFunctional,
    target: &Str,
    n: usize,
    bound: &BoundSpec,
    max_len: usize,
) -> Result<Str, ReductionError> {
    let t = phi
        .transducer()
        .ok_or_else(|| ReductionError::NotTransducer(phi.name().to_string()))?;
    let m = prepare(phi, target, n, bound, max_len)?;
    let want = &target.symbols()[..m];
    let k = phi.alphabet().size();
    // Key `None` is the absorbing node.
    let mut layer: BTreeMap<Option<(usize, usize)>, Vec<Symbol>> = BTreeMap::new();
    if m == 0 {
        layer.insert(None, Vec::new());
    } else {
        layer.insert(Some((t.start(), 0)), Vec::new());
    }
    for depth in 0..=max_len {
        if depth >= n {
            if let Some(x) = layer.get(&None) {
                return Ok(Str::new(phi.alphabet(), x[..n].to_vec())?);
            }
        }
        if depth == max_len || layer.is_empty() {
            break;
        }
        let mut next: BTreeMap<Option<(usize, usize)>, Vec<Symbol>> = BTreeMap::new();
        for (node, x) in &layer {
            for a in 0..k as Symbol {
                let child = match node {
                    None => None,
                    Some((q, j)) => {
                        let (q2, out) = t.step(*q, a);
                        let take = out.len().min(m - j);
                        if out[..take] != want[*j..j + take] {
                            continue;
                        }
                        if j + take == m {
                            None
                        } else {
                            Some((q2, j + take))
                        }
                    }
                };
                let mut cand = Vec::with_capacity(x.len() + 1);
                cand.extend_from_slice(x);
                cand.push(a);
                match next.get_mut(&child) {
                    Some(best) if *best <= cand => {}
                    Some(best) => *best = cand,
                    None => {
                        next.insert(child, cand);
                    }
                }
            }
        }
        layer = next;
    }
    Err(ReductionError::NotFound { n, max_len })
}
