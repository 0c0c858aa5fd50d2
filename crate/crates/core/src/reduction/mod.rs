//! Finite-horizon verification of bounded reductions, the uniquely-yielding
//! check, and inversion of uniquely yielding functionals.
//!
//! Every verdict is "holds up to N": reports carry the horizon they checked.

mod invert;
mod report;
mod unique;
mod verify;

use std::sync::Arc;

use thiserror::Error;

pub use crate::bound::{limsup_ratio, BoundError, BoundSpec, LimsupRatio, Rational};
use crate::functional::{FunctionalError, TuringFunctional};
use crate::seq::{SeqError, SequenceGen};

pub use invert::{invert_uyb, invert_uyb_fast, BRUTE_FORCE_GUARD};
pub use report::{
    ClauseReport, Failure, FailureCategory, ReductionKind, ReductionReport, Row, Verdict,
};
pub use unique::{
    check_uniquely_yielding, check_uniquely_yielding_product, replay_counterexample, UniqueCheck,
    ENUMERATION_GUARD,
};
pub use verify::{verify_bt, verify_uyb};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("enumeration guard exceeded: {k}^{cap} candidates")]
    GuardExceeded { k: usize, cap: usize },
    #[error("`{0}` is not a transducer; this check is only exact for transducers")]
    NotTransducer(String),
    #[error("Φ^S for `{functional}` does not reach {needed} symbols within the budget")]
    Partial { functional: String, needed: u64 },
    #[error("no preimage of length <= {max_len} found for n = {n}")]
    NotFound { n: usize, max_len: usize },
    #[error("{0}")]
    BadArgs(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    UseBounded,
    YieldBounded,
}

/// A claimed reduction of `to` (Z) to `from` (X) via `phi` under `bound`.
#[derive(Clone, Debug)]
pub struct ReductionWitness {
    pub phi: Arc<TuringFunctional>,
    pub from: SequenceGen,
    pub to: SequenceGen,
    pub bound: BoundSpec,
    pub mode: Mode,
}

impl ReductionWitness {
    /// `Z = Φ^X`.
    pub fn derived(
        phi: Arc<TuringFunctional>,
        from: SequenceGen,
        bound: BoundSpec,
        mode: Mode,
        budget: u64,
    ) -> Result<Self, ReductionError> {
        let to = SequenceGen::derived(Arc::clone(&phi), from.clone(), budget)?;
        Ok(ReductionWitness {
            phi,
            from,
            to,
            bound,
            mode,
        })
    }
}
