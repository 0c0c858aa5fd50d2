//! Turing functionals with exact use and yield instrumentation.
//!
//! Two machine classes share one interface. Transducers read one oracle
//! symbol per step, so divergence under a string oracle is decidable and use
//! and yield are exact. Register programs are general but budgeted; their
//! divergence verdicts are relative to the step budget.

mod builtin;
mod dsl;
mod program;
mod transducer;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::bound::BoundSpec;
use crate::seq::{Alphabet, SeqError, SequenceGen, Str, Symbol};

pub use builtin::{builtin, condense, constant, copy_program, dilute, identity, xor_mask, BUILTIN_NAMES};
pub use dsl::{parse_functional, parse_functionals};
pub use program::{Instr, Program, QuerySource, Reg, NUM_REGISTERS};
pub use transducer::{Trace, Transducer};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// `MDIMLAB_BUDGET` if set and valid, else [`DEFAULT_BUDGET`].
pub fn default_budget() -> u64 {
    std::env::var("MDIMLAB_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("functional `{name}` has alphabet {functional}, oracle has {oracle}")]
    AlphabetMismatch {
        name: String,
        functional: usize,
        oracle: usize,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid transducer: {0}")]
    InvalidTransducer(String),
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("unknown functional `{0}`")]
    UnknownBuiltin(String),
    #[error("program emitted {value}, outside the alphabet (pc {pc})")]
    BadEmit { value: u64, pc: usize },
    #[error("program halted after {got} of {wanted} symbols")]
    ShortOutput { wanted: usize, got: usize },
    #[error("diverged: {0}")]
    Diverged(DivergeReason),
    #[error("oracle string has length {len}, prefix of length {n} requested")]
    OracleTooShort { len: usize, n: usize },
    #[error("step budget must be positive")]
    ZeroBudget,
    #[error("`{0}` needs a transducer")]
    NotTransducer(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergeReason {
    OracleOutOfRange,
    BudgetExhausted,
    /// A transducer over a sequence oracle read its whole budget without
    /// producing enough output.
    EmissionStall,
}

impl fmt::Display for DivergeReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DivergeReason::OracleOutOfRange => "oracle-out-of-range",
            DivergeReason::BudgetExhausted => "budget-exhausted",
            DivergeReason::EmissionStall => "emission-stall",
        })
    }
}

/// Whether a divergence verdict is exact or relative to the step budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Exact,
    BudgetRelative,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Body {
    Transducer(Transducer),
    Program(Program),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuringFunctional {
    name: String,
    body: Body,
}

impl TuringFunctional {
    pub fn new(name: impl Into<String>, body: Body) -> Self {
        TuringFunctional {
            name: name.into(),
            body,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn alphabet(&self) -> Alphabet {
        match &self.body {
            Body::Transducer(t) => t.alphabet(),
            Body::Program(p) => p.alphabet(),
        }
    }

    pub fn transducer(&self) -> Option<&Transducer> {
        match &self.body {
            Body::Transducer(t) => Some(t),
            Body::Program(_) => None,
        }
    }

    pub fn regime(&self) -> Regime {
        match self.body {
            Body::Transducer(_) => Regime::Exact,
            Body::Program(_) => Regime::BudgetRelative,
        }
    }

    fn check_oracle(&self, alphabet: Alphabet) -> Result<(), FunctionalError> {
        if alphabet != self.alphabet() {
            return Err(FunctionalError::AlphabetMismatch {
                name: self.name.clone(),
                functional: self.alphabet().size(),
                oracle: alphabet.size(),
            });
        }
        Ok(())
    }
}

/// Resolves a built-in name, or failing that, a path to a DSL file.
pub fn load(spec: &str, alphabet: Alphabet) -> Result<TuringFunctional, FunctionalError> {
    match builtin(spec, alphabet) {
        Ok(f) => Ok(f),
        Err(FunctionalError::UnknownBuiltin(_)) if Path::new(spec).is_file() => {
            let text = std::fs::read_to_string(spec).map_err(SeqError::from)?;
            parse_functional(&text)
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Oracle<'a> {
    Str(&'a Str),
    Seq(&'a SequenceGen),
}

impl Oracle<'_> {
    pub fn alphabet(&self) -> Alphabet {
        match self {
            Oracle::Str(s) => s.alphabet(),
            Oracle::Seq(g) => g.alphabet(),
        }
    }

    /// `S↾n`.
    pub fn prefix(&self, n: usize) -> Result<Str, FunctionalError> {
        match self {
            Oracle::Str(s) if s.len() < n => Err(FunctionalError::OracleTooShort { len: s.len(), n }),
            Oracle::Str(s) => Ok(s.truncated(n)),
            Oracle::Seq(g) => Ok(g.try_prefix(n)?),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Oracle::Str(s) if s.len() <= 32 => format!("\"{s}\""),
            Oracle::Str(s) => format!("string(len={})", s.len()),
            Oracle::Seq(g) => g.describe(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Halt(Str),
    Diverge(DivergeReason),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: Status,
    /// Largest oracle position queried, including a final out-of-range query.
    pub largest_query: Option<u64>,
    pub steps: u64,
    pub regime: Regime,
}

impl RunOutcome {
    pub fn output(&self) -> Option<&Str> {
        match &self.status {
            Status::Halt(s) => Some(s),
            Status::Diverge(_) => None,
        }
    }

    pub fn halted(&self) -> bool {
        matches!(self.status, Status::Halt(_))
    }

    /// `m + 1` for largest query `m`, 0 with no query, `None` on divergence.
    pub fn use_value(&self) -> Option<u64> {
        match self.status {
            Status::Halt(_) => Some(self.largest_query.map_or(0, |m| m + 1)),
            Status::Diverge(_) => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (status, output, reason) = match &self.status {
            Status::Halt(s) => ("halt", Some(s.to_string()), None),
            Status::Diverge(r) => ("diverge", None, Some(*r)),
        };
        json!({
            "status": status,
            "output": output,
            "reason": reason,
            "largest_query": self.largest_query,
            "use": self.use_value(),
            "steps": self.steps,
            "regime": self.regime,
        })
    }
}

struct StrSource<'a>(&'a [Symbol]);

impl QuerySource for StrSource<'_> {
    fn query(&mut self, i: u64) -> Result<Symbol, DivergeReason> {
        self.0
            .get(i as usize)
            .copied()
            .ok_or(DivergeReason::OracleOutOfRange)
    }
}

/// Lazily materialized sequence prefix. Positions at or past `limit` count as
/// budget exhaustion so a wild query cannot force an unbounded prefix.
struct SeqSource<'a> {
    gen: &'a SequenceGen,
    buf: Vec<Symbol>,
    limit: u64,
}

impl QuerySource for SeqSource<'_> {
    fn query(&mut self, i: u64) -> Result<Symbol, DivergeReason> {
        if i >= self.limit {
            return Err(DivergeReason::BudgetExhausted);
        }
        if i as usize >= self.buf.len() {
            let want = ((i as usize + 1).max(2 * self.buf.len()).max(64) as u64).min(self.limit);
            self.buf = self
                .gen
                .try_prefix(want as usize)
                .map_err(|_| DivergeReason::BudgetExhausted)?
                .into_symbols();
        }
        Ok(self.buf[i as usize])
    }
}

/// `Φ^oracle(n)` with instrumentation.
pub fn run(
    phi: &TuringFunctional,
    oracle: Oracle,
    n: usize,
    budget: u64,
) -> Result<RunOutcome, FunctionalError> {
    phi.check_oracle(oracle.alphabet())?;
    if budget == 0 {
        return Err(FunctionalError::ZeroBudget);
    }
    let alphabet = phi.alphabet();
    let regime = phi.regime();
    if n == 0 {
        return Ok(RunOutcome {
            status: Status::Halt(Str::empty(alphabet)),
            largest_query: None,
            steps: 0,
            regime,
        });
    }
    match &phi.body {
        Body::Transducer(t) => {
            let (trace, reached, exhausted) = match oracle {
                Oracle::Str(x) => {
                    let tr = t.trace(x.symbols(), n);
                    let ok = tr.output.len() >= n;
                    (tr, ok, DivergeReason::OracleOutOfRange)
                }
                Oracle::Seq(g) => {
                    let (tr, ok) = t.trace_seq(g, n, budget);
                    (tr, ok, DivergeReason::EmissionStall)
                }
            };
            if reached {
                let mut out = trace.output;
                out.truncate(n);
                Ok(RunOutcome {
                    status: Status::Halt(Str::new(alphabet, out)?),
                    largest_query: Some(trace.consumed - 1),
                    steps: trace.consumed,
                    regime,
                })
            } else {
                // Out of range: the failing query is at position |x|.
                let largest = match exhausted {
                    DivergeReason::OracleOutOfRange => Some(trace.consumed),
                    _ => trace.consumed.checked_sub(1),
                };
                Ok(RunOutcome {
                    status: Status::Diverge(exhausted),
                    largest_query: largest,
                    steps: trace.consumed,
                    regime,
                })
            }
        }
        Body::Program(p) => {
            let r = match oracle {
                Oracle::Str(x) => p.execute(&mut StrSource(x.symbols()), n, budget)?,
                Oracle::Seq(g) => p.execute(
                    &mut SeqSource {
                        gen: g,
                        buf: Vec::new(),
                        limit: budget,
                    },
                    n,
                    budget,
                )?,
            };
            let status = match r.end {
                program::ProgramEnd::Halted(out) => Status::Halt(Str::new(alphabet, out)?),
                program::ProgramEnd::Diverged(reason) => Status::Diverge(reason),
            };
            Ok(RunOutcome {
                status,
                largest_query: r.largest_query,
                steps: r.steps,
                regime,
            })
        }
    }
}

/// The output of a halting run; divergence is an error.
pub fn apply(
    phi: &TuringFunctional,
    oracle: Oracle,
    n: usize,
    budget: u64,
) -> Result<Str, FunctionalError> {
    let out = run(phi, oracle, n, budget)?;
    match out.status {
        Status::Halt(s) => Ok(s),
        Status::Diverge(r) => Err(FunctionalError::Diverged(r)),
    }
}

/// `use(n)`; `None` when the run diverges.
pub fn use_of(
    phi: &TuringFunctional,
    oracle: Oracle,
    n: usize,
    budget: u64,
) -> Result<Option<u64>, FunctionalError> {
    Ok(run(phi, oracle, n, budget)?.use_value())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YieldValue {
    Finite(u64),
    /// No divergent input found up to the search cap.
    Unbounded,
}

impl YieldValue {
    pub fn finite(self) -> Option<u64> {
        match self {
            YieldValue::Finite(v) => Some(v),
            YieldValue::Unbounded => None,
        }
    }
}

impl fmt::Display for YieldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YieldValue::Finite(v) => write!(f, "{v}"),
            YieldValue::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct YieldReport {
    pub value: YieldValue,
    pub regime: Regime,
}

/// `yield(n) = min { m : Φ^{S↾n}(m) diverges }`.
///
/// Exact for transducers (`out_len(n) + 1`, `max_m` unused). For programs
/// the search runs `m = 0..=max_m` and the answer is budget-relative.
pub fn yield_of(
    phi: &TuringFunctional,
    oracle: Oracle,
    n: usize,
    max_m: usize,
    budget: u64,
) -> Result<YieldReport, FunctionalError> {
    phi.check_oracle(oracle.alphabet())?;
    let prefix = oracle.prefix(n)?;
    let value = match &phi.body {
        Body::Transducer(t) => YieldValue::Finite(t.out_len(prefix.symbols()) as u64 + 1),
        Body::Program(_) => {
            let mut found = YieldValue::Unbounded;
            for m in 0..=max_m {
                if !run(phi, Oracle::Str(&prefix), m, budget)?.halted() {
                    found = YieldValue::Finite(m as u64);
                    break;
                }
            }
            found
        }
    };
    Ok(YieldReport {
        value,
        regime: phi.regime(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UseViolationKind {
    UseExceeded,
    Divergence,
    /// Outputs for `n` and `n + 1` are not prefix-coherent.
    Incoherent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseViolation {
    pub n: u64,
    pub oracle: String,
    #[serde(rename = "use")]
    pub use_value: Option<u64>,
    pub bound: u64,
    pub kind: UseViolationKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseCertificate {
    pub functional: String,
    pub bound: BoundSpec,
    pub horizon: u64,
    pub regime: Regime,
    pub oracles: usize,
    pub pass: bool,
    /// No oracles were supplied, so the pass is empty.
    pub vacuous: bool,
    pub first_violation: Option<UseViolation>,
}

/// Checks `use(n) <= bound(n)` for `n <= horizon` on every oracle.
pub fn certify_use_bound(
    phi: &TuringFunctional,
    bound: &BoundSpec,
    horizon: u64,
    oracles: &[Oracle],
    budget: u64,
) -> Result<UseCertificate, FunctionalError> {
    let mut first_violation = None;
    'oracles: for oracle in oracles {
        phi.check_oracle(oracle.alphabet())?;
        let violation = |n: u64, use_value, kind| UseViolation {
            n,
            oracle: oracle.describe(),
            use_value,
            bound: bound.eval(n),
            kind,
        };
        match &phi.body {
            Body::Transducer(t) => {
                let trace = match oracle {
                    Oracle::Str(x) => t.trace(x.symbols(), horizon as usize),
                    Oracle::Seq(g) => t.trace_seq(g, horizon as usize, budget).0,
                };
                for n in 0..=horizon {
                    match trace.use_at(n as usize) {
                        None => {
                            first_violation = Some(violation(n, None, UseViolationKind::Divergence));
                            break 'oracles;
                        }
                        Some(u) if u > bound.eval(n) => {
                            first_violation =
                                Some(violation(n, Some(u), UseViolationKind::UseExceeded));
                            break 'oracles;
                        }
                        Some(_) => {}
                    }
                }
            }
            Body::Program(_) => {
                let mut prev: Option<Str> = None;
                for n in 0..=horizon {
                    let out = run(phi, *oracle, n as usize, budget)?;
                    let kind = match (out.use_value(), out.output()) {
                        (None, _) | (_, None) => Some(UseViolationKind::Divergence),
                        (Some(u), _) if u > bound.eval(n) => Some(UseViolationKind::UseExceeded),
                        (_, Some(o)) if prev.as_ref().is_some_and(|p| !p.is_prefix_of(o)) => {
                            Some(UseViolationKind::Incoherent)
                        }
                        _ => None,
                    };
                    if let Some(kind) = kind {
                        first_violation = Some(violation(n, out.use_value(), kind));
                        break 'oracles;
                    }
                    prev = out.output().cloned();
                }
            }
        }
    }
    Ok(UseCertificate {
        functional: phi.name.clone(),
        bound: bound.clone(),
        horizon,
        regime: phi.regime(),
        oracles: oracles.len(),
        pass: first_violation.is_none(),
        vacuous: oracles.is_empty(),
        first_violation,
    })
}
