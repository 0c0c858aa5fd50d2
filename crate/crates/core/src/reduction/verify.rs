use crate::bound::BoundSpec;
use crate::functional::{run, Body, Oracle, Status, Trace, Transducer};
use crate::seq::{Str, Symbol};

use super::report::{
    ClauseReport, Failure, FailureCategory, ReductionKind, ReductionReport, Row, Verdict,
};
use super::unique::{check_uniquely_yielding, check_uniquely_yielding_product, ENUMERATION_GUARD};
use super::{Mode, ReductionError, ReductionWitness};

fn first_mismatch(out: &[Symbol], z: &[Symbol]) -> Option<usize> {
    out.iter().zip(z).position(|(a, b)| a != b)
}

fn base_report(w: &ReductionWitness, kind: ReductionKind, horizon: u64) -> ReductionReport {
    ReductionReport {
        kind,
        verdict: Verdict::Pass,
        functional: w.phi.name().to_string(),
        from: w.from.describe(),
        to: w.to.describe(),
        horizon,
        bound_spec: w.bound.clone(),
        regime: w.phi.regime(),
        vacuous: horizon == 0,
        enumeration_cap: None,
        rows: Vec::new(),
        first_failure: None,
        clauses: Vec::new(),
        counterexample: None,
    }
}

/// Per-n outputs and use values of `Φ^X(n)` for `n <= horizon`. `None` marks
/// divergence.
fn outputs(
    w: &ReductionWitness,
    horizon: u64,
    budget: u64,
) -> Result<(Vec<Option<u64>>, Option<usize>), ReductionError> {
    let z = w.to.try_prefix(horizon as usize)?;
    match w.phi.body() {
        Body::Transducer(t) => {
            let (trace, _) = t.trace_seq(&w.from, horizon as usize, budget);
            let uses = (0..=horizon).map(|n| trace.use_at(n as usize)).collect();
            let mismatch = first_mismatch(&trace.output, z.symbols()).map(|i| i + 1);
            Ok((uses, mismatch))
        }
        Body::Program(_) => {
            let mut uses = Vec::with_capacity(horizon as usize + 1);
            let mut mismatch = None;
            for n in 0..=horizon as usize {
                let out = run(&w.phi, Oracle::Seq(&w.from), n, budget)?;
                if let Status::Halt(o) = &out.status {
                    if mismatch.is_none() && o != &z.truncated(n) {
                        mismatch = Some(n);
                    }
                }
                uses.push(out.use_value());
            }
            Ok((uses, mismatch))
        }
    }
}

/// Checks, for every `n <= horizon`, that `Φ^X(n)` halts with `Z↾n` and
/// `use(n) <= bound(n)`.
pub fn verify_bt(
    w: &ReductionWitness,
    horizon: u64,
    budget: u64,
) -> Result<ReductionReport, ReductionError> {
    if w.mode != Mode::UseBounded {
        return Err(ReductionError::BadArgs("verify_bt needs a use-bounded witness".into()));
    }
    let mut report = base_report(w, ReductionKind::BoundedTuring, horizon);
    let (uses, mismatch) = outputs(w, horizon, budget)?;
    for (n, value) in uses.into_iter().enumerate() {
        let n = n as u64;
        let bound = w.bound.eval(n);
        let failure = match value {
            None => Some((FailureCategory::Divergence, format!("Φ^X({n}) diverges"))),
            Some(_) if mismatch.is_some_and(|m| n as usize >= m) => Some((
                FailureCategory::OutputMismatch,
                format!("output differs from Z at position {}", mismatch.unwrap() - 1),
            )),
            Some(u) if u > bound => Some((
                FailureCategory::UseExceeded,
                format!("use {u} exceeds bound {bound}"),
            )),
            Some(_) => None,
        };
        if let Some((category, detail)) = &failure {
            if report.first_failure.is_none() {
                report.first_failure = Some(Failure {
                    n,
                    category: *category,
                    detail: detail.clone(),
                });
            }
        }
        report.rows.push(Row {
            n,
            value,
            bound,
            ok: failure.is_none(),
        });
    }
    report.verdict = Verdict::from_ok(report.first_failure.is_none());
    Ok(report)
}

fn yield_rows(t: &Transducer, x: &Str, bound: &BoundSpec, horizon: u64) -> Vec<Row> {
    let trace: Trace = t.trace(x.symbols(), usize::MAX);
    (0..=horizon)
        .map(|n| {
            let y = trace.out_len_after(n) as u64 + 1;
            let b = bound.eval(n);
            Row {
                n,
                value: Some(y),
                bound: b,
                ok: y <= b,
            }
        })
        .collect()
}

/// Clause (a) `Φ^X = Z` up to `horizon`, (b) `yield(n) <= bound(n)`, and
/// (c) uniquely yielding at every `1 <= n <= horizon`. Clause (c) enumerates
/// length-`cap` oracles while `n <= cap`, then switches to the product search.
pub fn verify_uyb(
    w: &ReductionWitness,
    horizon: u64,
    cap: usize,
    budget: u64,
) -> Result<ReductionReport, ReductionError> {
    if w.mode != Mode::YieldBounded {
        return Err(ReductionError::BadArgs("verify_uyb needs a yield-bounded witness".into()));
    }
    let t = w
        .phi
        .transducer()
        .ok_or_else(|| ReductionError::NotTransducer(w.phi.name().to_string()))?;
    let mut report = base_report(w, ReductionKind::Uyb, horizon);
    report.enumeration_cap = Some(cap);

    let (uses, mismatch) = outputs(w, horizon, budget)?;
    let a_fail = match uses.iter().position(Option::is_none) {
        Some(n) if mismatch.is_none_or(|m| n < m) => Some(Failure {
            n: n as u64,
            category: FailureCategory::Divergence,
            detail: format!("Φ^X({n}) diverges"),
        }),
        _ => mismatch.map(|m| Failure {
            n: m as u64,
            category: FailureCategory::OutputMismatch,
            detail: format!("output differs from Z at position {}", m - 1),
        }),
    };

    let x = w.from.try_prefix(horizon as usize)?;
    report.rows = yield_rows(t, &x, &w.bound, horizon);
    let b_fail = report.rows.iter().find(|r| !r.ok).map(|r| Failure {
        n: r.n,
        category: FailureCategory::YieldExceeded,
        detail: format!("yield {} exceeds bound {}", r.value.unwrap_or(0), r.bound),
    });

    let k = w.phi.alphabet().size() as u64;
    let enumerable = k.checked_pow(cap as u32).is_some_and(|v| v <= ENUMERATION_GUARD);
    let mut c_fail = None;
    for n in 1..=horizon as usize {
        let check = if enumerable && n <= cap {
            check_uniquely_yielding(&w.phi, &w.from, n, cap, budget)?
        } else {
            check_uniquely_yielding_product(&w.phi, &w.from, n, cap, budget)?
        };
        if !check.holds() {
            c_fail = Some(Failure {
                n: n as u64,
                category: FailureCategory::NotUniquelyYielding,
                detail: serde_json::to_string(&check).expect("serializable"),
            });
            report.counterexample = Some(check);
            break;
        }
    }

    for (clause, fail) in [("a", a_fail), ("b", b_fail), ("c", c_fail)] {
        if report.first_failure.is_none() {
            report.first_failure = fail.clone();
        }
        report.clauses.push(ClauseReport {
            clause: clause.to_string(),
            verdict: Verdict::from_ok(fail.is_none()),
            first_failure: fail,
        });
    }
    report.verdict = Verdict::from_ok(report.first_failure.is_none());
    Ok(report)
}
