use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bound::BoundSpec;
use crate::functional::Regime;

use super::unique::UniqueCheck;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_ok(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureCategory {
    OutputMismatch,
    UseExceeded,
    YieldExceeded,
    Divergence,
    NotUniquelyYielding,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub n: u64,
    pub category: FailureCategory,
    pub detail: String,
}

/// One horizon point: `value` is use (bT) or yield (uyb); `None` means the
/// run diverged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub n: u64,
    pub value: Option<u64>,
    pub bound: u64,
    pub ok: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    #[serde(rename = "bT")]
    BoundedTuring,
    Uyb,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseReport {
    pub clause: String,
    pub verdict: Verdict,
    pub first_failure: Option<Failure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub kind: ReductionKind,
    pub verdict: Verdict,
    pub functional: String,
    pub from: String,
    pub to: String,
    pub horizon: u64,
    pub bound_spec: BoundSpec,
    pub regime: Regime,
    /// `horizon == 0`: nothing was checked.
    pub vacuous: bool,
    /// Enumeration cap for the uniquely-yielding clause.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration_cap: Option<usize>,
    pub rows: Vec<Row>,
    pub first_failure: Option<Failure>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clauses: Vec<ClauseReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<UniqueCheck>,
}

impl ReductionReport {
    /// The report with per-n rows dropped.
    pub fn summary(&self) -> ReductionReport {
        ReductionReport {
            rows: Vec::new(),
            ..self.clone()
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    /// Columns `n,use_or_yield,bound,ok`; divergent rows leave the value empty.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "use_or_yield", "bound", "ok"])?;
        for r in &self.rows {
            out.write_record([
                r.n.to_string(),
                r.value.map(|v| v.to_string()).unwrap_or_default(),
                r.bound.to_string(),
                r.ok.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
