//! Computable stand-ins for Kolmogorov complexity and mutual information.
//!
//! True K is uncomputable; every value here is proxy-relative and every
//! report names its proxy. Values are quantized to multiples of 2^-16 bits
//! so sums and differences of them are exact in `f64`.

mod context;
mod diagnostics;
mod lz78;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seq::{SeqError, Str};

pub use context::ContextProxy;
pub use diagnostics::{
    default_corpus, proxy_diagnostics, Corpus, DiagnosticReport, LemmaId, LemmaReport,
    SlackModel, Triple, TripleFailure, PROC_MASK,
};
pub use lz78::{lz78_bits, lz78_primed_bits, Lz78Proxy};

pub const PROXY_NAMES: &[&str] = &["ctx", "lz78", "lz78-primed"];

#[derive(Debug, Error)]
pub enum ProxyError {
    #[error("unknown proxy `{0}` (known: ctx, lz78, lz78-primed)")]
    Unknown(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("diagnostic corpus is empty")]
    EmptyCorpus,
}

/// Rounds to the nearest multiple of 2^-16.
pub fn quantize(bits: f64) -> f64 {
    (bits * 65536.0).round() / 65536.0
}

/// Elias gamma length of `n + 1`: a self-delimiting cost for a length.
pub fn gamma_bits(n: u64) -> f64 {
    (2 * (63 - (n + 1).leading_zeros()) + 1) as f64
}

/// `K(x↾n)`, `K(y↾n)`, `K(x↾n, y↾n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefixTerms {
    pub n: usize,
    pub kx: f64,
    pub ky: f64,
    pub kxy: f64,
}

impl PrefixTerms {
    /// Symmetric-form mutual information.
    pub fn info(&self) -> f64 {
        self.kx + self.ky - self.kxy
    }
}

pub trait ComplexityProxy: Send + Sync {
    fn name(&self) -> &str;

    /// Bits for `x`; 0 for the empty string.
    fn k_plain(&self, x: &Str) -> f64;

    fn k_joint(&self, x: &Str, y: &Str) -> f64;

    /// Bits for `y` given `x`. Defaults to the chain rule.
    fn k_cond(&self, y: &Str, x: &Str) -> f64 {
        k_cond_default(y, x, self)
    }

    /// Terms for the prefixes of length `ns` (each at most both lengths).
    fn prefix_terms(&self, x: &Str, y: &Str, ns: &[usize]) -> Vec<PrefixTerms> {
        ns.par_iter()
            .map(|&n| {
                let (xn, yn) = (x.truncated(n), y.truncated(n));
                PrefixTerms {
                    n,
                    kx: self.k_plain(&xn),
                    ky: self.k_plain(&yn),
                    kxy: self.k_joint(&xn, &yn),
                }
            })
            .collect()
    }
}

/// `max(K(x, y) - K(x), 0)`.
pub fn k_cond_default<P: ComplexityProxy + ?Sized>(y: &Str, x: &Str, proxy: &P) -> f64 {
    (proxy.k_joint(x, y) - proxy.k_plain(x)).max(0.0)
}

/// Wraps a proxy so its conditional is the chain-rule surrogate.
pub struct ChainRule<'a>(pub &'a dyn ComplexityProxy);

impl ComplexityProxy for ChainRule<'_> {
    fn name(&self) -> &str {
        self.0.name()
    }
    fn k_plain(&self, x: &Str) -> f64 {
        self.0.k_plain(x)
    }
    fn k_joint(&self, x: &Str, y: &Str) -> f64 {
        self.0.k_joint(x, y)
    }
    fn prefix_terms(&self, x: &Str, y: &Str, ns: &[usize]) -> Vec<PrefixTerms> {
        self.0.prefix_terms(x, y, ns)
    }
}

pub fn proxy_by_name(name: &str) -> Result<Box<dyn ComplexityProxy>, ProxyError> {
    match name {
        "ctx" => Ok(Box::new(ContextProxy)),
        "lz78" => Ok(Box::new(Lz78Proxy { primed: false })),
        "lz78-primed" => Ok(Box::new(Lz78Proxy { primed: true })),
        other => Err(ProxyError::Unknown(other.to_string())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `K(y) - K(y|x)`
    Definitional,
    /// `K(x) + K(y) - K(x, y)`
    Symmetric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutualInfoEstimate {
    pub value_bits: f64,
    pub proxy: String,
    pub form: Form,
}

/// `I(x:y)` under `proxy`. Negative values are returned as they are.
pub fn mutual_info<P: ComplexityProxy + ?Sized>(
    x: &Str,
    y: &Str,
    proxy: &P,
    form: Form,
) -> Result<MutualInfoEstimate, ProxyError> {
    x.alphabet().check_same(y.alphabet())?;
    let value_bits = match form {
        Form::Definitional => proxy.k_plain(y) - proxy.k_cond(y, x),
        Form::Symmetric => proxy.k_plain(x) + proxy.k_plain(y) - proxy.k_joint(x, y),
    };
    Ok(MutualInfoEstimate {
        value_bits,
        proxy: proxy.name().to_string(),
        form,
    })
}
