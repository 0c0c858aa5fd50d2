use crate::seq::{Alphabet, SequenceGen, Symbol};

use super::FunctionalError;

/// Deterministic finite-state transducer: every step reads one oracle symbol
/// and appends a (possibly empty) output string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transducer {
    alphabet: Alphabet,
    states: Vec<String>,
    start: usize,
    /// Indexed by `state * k + input`.
    table: Vec<(usize, Vec<Symbol>)>,
}

/// Output of feeding a transducer some input, with the input position at
/// which each output symbol became available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub output: Vec<Symbol>,
    /// `consumed_at[j]` = number of input symbols read when output `j` was
    /// emitted, so `use(j + 1) = consumed_at[j]`.
    pub consumed_at: Vec<u64>,
    pub consumed: u64,
}

impl Trace {
    /// `use(n)` for a run that halts on input `n`.
    pub fn use_at(&self, n: usize) -> Option<u64> {
        match n {
            0 => Some(0),
            _ => self.consumed_at.get(n - 1).copied(),
        }
    }

    /// Output length after reading the first `m` input symbols.
    pub fn out_len_after(&self, m: u64) -> usize {
        self.consumed_at.partition_point(|&c| c <= m)
    }
}

impl Transducer {
    /// `rows[q][a] = (next, output)`. State names are for display only.
    pub fn new(
        alphabet: Alphabet,
        states: Vec<String>,
        start: usize,
        rows: Vec<Vec<(usize, Vec<Symbol>)>>,
    ) -> Result<Self, FunctionalError> {
        let k = alphabet.size();
        let bad = |msg: String| Err(FunctionalError::InvalidTransducer(msg));
        if states.is_empty() || states.len() != rows.len() {
            return bad(format!("{} state names for {} rows", states.len(), rows.len()));
        }
        if start >= states.len() {
            return bad(format!("start state {start} out of range"));
        }
        let mut table = Vec::with_capacity(states.len() * k);
        for (q, row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return bad(format!(
                    "state {} has {} transitions, expected {k}",
                    states[q],
                    row.len()
                ));
            }
            for (next, out) in row {
                if next >= states.len() {
                    return bad(format!("transition from {} to unknown state {next}", states[q]));
                }
                if let Some(&s) = out.iter().find(|&&s| !alphabet.contains(s)) {
                    return bad(format!("output symbol {s} outside alphabet of size {k}"));
                }
                table.push((next, out));
            }
        }
        Ok(Transducer {
            alphabet,
            states,
            start,
            table,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    pub fn start(&self) -> usize {
        self.start
    }

    #[inline]
    pub fn step(&self, q: usize, a: Symbol) -> (usize, &[Symbol]) {
        let (next, out) = &self.table[q * self.alphabet.size() + a as usize];
        (*next, out)
    }

    /// Runs over `input`, stopping early once `want` outputs exist.
    pub fn trace(&self, input: &[Symbol], want: usize) -> Trace {
        let mut t = Trace {
            output: Vec::new(),
            consumed_at: Vec::new(),
            consumed: 0,
        };
        let mut q = self.start;
        for &a in input {
            if t.output.len() >= want {
                break;
            }
            let (next, out) = self.step(q, a);
            q = next;
            t.consumed += 1;
            t.output.extend_from_slice(out);
            t.consumed_at.extend(std::iter::repeat_n(t.consumed, out.len()));
        }
        t
    }

    /// Like [`Transducer::trace`] over a sequence oracle; reads at most
    /// `budget` symbols. The flag is false if `want` outputs were not reached.
    pub fn trace_seq(&self, source: &SequenceGen, want: usize, budget: u64) -> (Trace, bool) {
        let mut cap = (want as u64).clamp(64, budget.max(1));
        loop {
            let buf = source.prefix(cap as usize);
            let t = self.trace(buf.symbols(), want);
            if t.output.len() >= want || cap >= budget {
                let ok = t.output.len() >= want;
                return (t, ok);
            }
            cap = cap.saturating_mul(2).min(budget);
        }
    }

    /// Number of outputs produced by reading all of `input`.
    pub fn out_len(&self, input: &[Symbol]) -> usize {
        self.trace(input, usize::MAX).output.len()
    }

    /// DSL text for this transducer.
    pub fn to_dsl(&self, name: &str) -> String {
        let k = self.alphabet.size();
        let mut s = format!(
            "transducer {name}\nalphabet {k}\nstart {}\n",
            self.states[self.start]
        );
        for q in 0..self.states.len() {
            for a in 0..k {
                let (next, out) = self.step(q, a as Symbol);
                let out = if out.is_empty() {
                    "-".to_string()
                } else if k <= 10 {
                    out.iter().map(|s| s.to_string()).collect()
                } else {
                    out.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
                };
                s.push_str(&format!("{}, {a} -> {}, {out}\n", self.states[q], self.states[next]));
            }
        }
        s.push_str("end\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dilute() -> Transducer {
        Transducer::new(
            Alphabet::BINARY,
            vec!["s".into()],
            0,
            vec![vec![(0, vec![0, 0]), (0, vec![1, 0])]],
        )
        .unwrap()
    }

    #[test]
    fn trace_records_consumption() {
        let t = dilute().trace(&[1, 1, 0], usize::MAX);
        assert_eq!(t.output, vec![1, 0, 1, 0, 0, 0]);
        assert_eq!(t.consumed_at, vec![1, 1, 2, 2, 3, 3]);
        assert_eq!(t.use_at(3), Some(2));
        assert_eq!(t.out_len_after(2), 4);
        assert_eq!(t.out_len_after(0), 0);
    }

    #[test]
    fn early_stop() {
        let t = dilute().trace(&[1, 1, 0], 3);
        assert_eq!(t.consumed, 2);
    }

    #[test]
    fn rejects_partial_tables() {
        let r = Transducer::new(Alphabet::BINARY, vec!["s".into()], 0, vec![vec![(0, vec![])]]);
        assert!(r.is_err());
        let r = Transducer::new(
            Alphabet::BINARY,
            vec!["s".into()],
            0,
            vec![vec![(0, vec![2]), (0, vec![])]],
        );
        assert!(r.is_err());
    }
}
