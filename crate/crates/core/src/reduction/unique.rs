//! Exact uniquely-yielding checks for transducers.
//!
//! `Φ` is uniquely yielding for `S` at `n` when every oracle `T` with
//! `Φ^S↾yield(n) ⊑ Φ^T` satisfies `S↾n ⊑ T`. A counterexample is reported as
//! a length-`L` oracle prefix `t` together with a finite `witness ⊒ t` whose
//! output already covers the target; both are replayable through the VM.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::functional::{Oracle, Transducer, TuringFunctional};
use crate::seq::{SequenceGen, Str, Symbol};

use super::ReductionError;

pub const ENUMERATION_GUARD: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum UniqueCheck {
    Holds {
        n: usize,
        yield_n: u64,
        cap: usize,
    },
    Counterexample {
        n: usize,
        yield_n: u64,
        /// `Φ^S↾yield(n)`.
        target: String,
        /// Oracle prefix of length `L` (or longer, from the product search).
        t: String,
        /// `t` extended until its output covers the target.
        witness: String,
    },
}

impl UniqueCheck {
    pub fn holds(&self) -> bool {
        matches!(self, UniqueCheck::Holds { .. })
    }
}

/// The pieces both search strategies need.
struct Setup<'a> {
    t: &'a Transducer,
    s: Vec<Symbol>,
    target: Vec<Symbol>,
    yield_n: u64,
}

fn setup<'a>(
    phi: &'a TuringFunctional,
    source: &SequenceGen,
    n: usize,
    budget: u64,
) -> Result<Setup<'a>, ReductionError> {
    let t = phi
        .transducer()
        .ok_or_else(|| ReductionError::NotTransducer(phi.name().to_string()))?;
    if n == 0 {
        return Err(ReductionError::BadArgs("n must be at least 1".into()));
    }
    let s = source.try_prefix(n)?.into_symbols();
    let yield_n = t.out_len(&s) as u64 + 1;
    let (trace, total) = t.trace_seq(source, yield_n as usize, budget);
    if !total {
        return Err(ReductionError::Partial {
            functional: phi.name().to_string(),
            needed: yield_n,
        });
    }
    let mut target = trace.output;
    target.truncate(yield_n as usize);
    Ok(Setup {
        t,
        s,
        target,
        yield_n,
    })
}

impl Setup<'_> {
    /// Advances matched-output count `j` by `out`; `None` on a mismatch.
    #[inline]
    fn advance(&self, j: usize, out: &[Symbol]) -> Option<usize> {
        let y = self.target.len();
        let take = out.len().min(y.saturating_sub(j));
        (out[..take] == self.target[j..j + take]).then_some(j + take)
    }

    fn text(&self, syms: &[Symbol]) -> String {
        Str::new(self.t.alphabet(), syms.to_vec())
            .expect("symbols come from the alphabet")
            .to_string()
    }

    /// Shortest-then-lex-least input from `(q, j)` that completes the target.
    fn complete(&self, q: usize, j: usize, memo: &mut HashMap<(usize, usize), Option<Vec<Symbol>>>) -> Option<Vec<Symbol>> {
        let y = self.target.len();
        if j >= y {
            return Some(Vec::new());
        }
        if let Some(hit) = memo.get(&(q, j)) {
            return hit.clone();
        }
        let k = self.t.alphabet().size();
        let mut parent: HashMap<(usize, usize), ((usize, usize), Symbol)> = HashMap::new();
        let mut queue = VecDeque::from([(q, j)]);
        let mut found = None;
        'bfs: while let Some((p, i)) = queue.pop_front() {
            for a in 0..k as Symbol {
                let (next, out) = self.t.step(p, a);
                let Some(i2) = self.advance(i, out) else { continue };
                let node = (next, i2);
                if node == (q, j) || parent.contains_key(&node) {
                    continue;
                }
                parent.insert(node, ((p, i), a));
                if i2 >= y {
                    found = Some(node);
                    break 'bfs;
                }
                queue.push_back(node);
            }
        }
        let result = found.map(|mut node| {
            let mut path = Vec::new();
            while node != (q, j) {
                let (prev, a) = parent[&node];
                path.push(a);
                node = prev;
            }
            path.reverse();
            path
        });
        memo.insert((q, j), result.clone());
        result
    }
}

/// Enumerates all oracle prefixes of length `cap` in lexicographic order.
///
/// Requires `1 <= n <= cap` and `k^cap <= 2^24`. Subtrees whose output
/// contradicts the target, or whose first `n` symbols equal `S↾n`, are
/// pruned; surviving leaves with short output are extended by a breadth-first
/// search over (state, matched length), so the answer is exact.
pub fn check_uniquely_yielding(
    phi: &TuringFunctional,
    source: &SequenceGen,
    n: usize,
    cap: usize,
    budget: u64,
) -> Result<UniqueCheck, ReductionError> {
    if cap < n {
        return Err(ReductionError::BadArgs(format!("cap {cap} is below n = {n}")));
    }
    let k = phi.alphabet().size() as u64;
    if k.checked_pow(cap as u32).is_none_or(|v| v > ENUMERATION_GUARD) {
        return Err(ReductionError::GuardExceeded { k: k as usize, cap });
    }
    let st = setup(phi, source, n, budget)?;
    let mut memo = HashMap::new();
    let mut path = Vec::with_capacity(cap);
    let found = dfs(&st, st.t.start(), 0, false, cap, n, &mut path, &mut memo);
    Ok(match found {
        None => UniqueCheck::Holds {
            n,
            yield_n: st.yield_n,
            cap,
        },
        Some((t, ext)) => {
            let mut witness = t.clone();
            witness.extend(ext);
            UniqueCheck::Counterexample {
                n,
                yield_n: st.yield_n,
                target: st.text(&st.target),
                t: st.text(&t),
                witness: st.text(&witness),
            }
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    st: &Setup,
    q: usize,
    j: usize,
    deviated: bool,
    cap: usize,
    n: usize,
    path: &mut Vec<Symbol>,
    memo: &mut HashMap<(usize, usize), Option<Vec<Symbol>>>,
) -> Option<(Vec<Symbol>, Vec<Symbol>)> {
    let depth = path.len();
    if depth == n && !deviated {
        return None;
    }
    if depth == cap {
        return st.complete(q, j, memo).map(|ext| (path.clone(), ext));
    }
    for a in 0..st.t.alphabet().size() as Symbol {
        let (next, out) = st.t.step(q, a);
        let Some(j2) = st.advance(j, out) else { continue };
        let dev = deviated || (depth < n && a != st.s[depth]);
        path.push(a);
        let hit = dfs(st, next, j2, dev, cap, n, path, memo);
        path.pop();
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// The same question decided on the product of the transducer with the
/// target and `S↾n`, without a length cap. Returns the shortest witness; `t`
/// is the witness padded with zeros to at least `cap` symbols.
pub fn check_uniquely_yielding_product(
    phi: &TuringFunctional,
    source: &SequenceGen,
    n: usize,
    cap: usize,
    budget: u64,
) -> Result<UniqueCheck, ReductionError> {
    let st = setup(phi, source, n, budget)?;
    let k = phi.alphabet().size();
    let y = st.target.len();
    // Node: (state, matched, read, deviated). Once deviated, `read` is pinned
    // to n; undeviated nodes with read == n are dead.
    type Node = (usize, usize, usize, bool);
    let start: Node = (st.t.start(), 0, 0, false);
    let success = |&(_, j, i, dev): &Node| j >= y && (dev || i < n);
    let mut parent: HashMap<Node, (Node, Symbol)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut hit = success(&start).then_some(start);
    while hit.is_none() {
        let Some(node) = queue.pop_front() else { break };
        let (q, j, i, dev) = node;
        for a in 0..k as Symbol {
            let (next, out) = st.t.step(q, a);
            let Some(j2) = st.advance(j, out) else { continue };
            let dev2 = dev || (i < n && a != st.s[i]);
            let i2 = if dev2 { n } else { i + 1 };
            if !dev2 && i2 >= n {
                continue;
            }
            let child = (next, j2, i2, dev2);
            if child == start || parent.contains_key(&child) {
                continue;
            }
            parent.insert(child, (node, a));
            if success(&child) {
                hit = Some(child);
                break;
            }
            queue.push_back(child);
        }
    }
    let Some(mut node) = hit else {
        return Ok(UniqueCheck::Holds {
            n,
            yield_n: st.yield_n,
            cap,
        });
    };
    let end = node;
    let mut witness = Vec::new();
    while node != start {
        let (prev, a) = parent[&node];
        witness.push(a);
        node = prev;
    }
    witness.reverse();
    if !end.3 {
        // Output already covers the target before position n; deviate now.
        let i = witness.len();
        witness.push(((st.s[i] as usize + 1) % k) as Symbol);
    }
    let mut t = witness.clone();
    if t.len() < cap {
        t.resize(cap, 0);
        witness = t.clone();
    }
    Ok(UniqueCheck::Counterexample {
        n,
        yield_n: st.yield_n,
        target: st.text(&st.target),
        t: st.text(&t[..cap.max(n).min(t.len())]),
        witness: st.text(&witness),
    })
}

/// Replays a counterexample through the VM: the witness run must reproduce
/// the target while `S↾n` is not a prefix of `t`.
pub fn replay_counterexample(
    phi: &TuringFunctional,
    source: &SequenceGen,
    check: &UniqueCheck,
    budget: u64,
) -> Result<bool, ReductionError> {
    let UniqueCheck::Counterexample {
        n,
        yield_n,
        target,
        t,
        witness,
    } = check
    else {
        return Ok(false);
    };
    let a = phi.alphabet();
    let t = Str::parse(t, a)?;
    let witness = Str::parse(witness, a)?;
    let target = Str::parse(target, a)?;
    let s = source.try_prefix(*n)?;
    let out = crate::functional::run(phi, Oracle::Str(&witness), *yield_n as usize, budget)?;
    let expected = crate::functional::run(phi, Oracle::Seq(source), *yield_n as usize, budget)?;
    Ok(out.output() == Some(&target)
        && expected.output() == Some(&target)
        && t.is_prefix_of(&witness)
        && !s.is_prefix_of(&t))
}
