//! Proxy health checks against the information lemmas.
//!
//! Each lemma is instantiated with proxy values and allowed a slack of
//! `a * log2(|u| + |v| + |w|) + b` bits. Pass rates measure how well a proxy
//! tracks the inequalities; they are not theorem checks.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::functional::{apply, builtin, Oracle, DEFAULT_BUDGET};
use crate::seq::{coupled_gen, Alphabet, JointDistribution, SequenceGen, Str};

use super::{gamma_bits, mutual_info, ComplexityProxy, Form, ProxyError};

/// Mask applied by `f(w, v)` in the processing lemma.
pub const PROC_MASK: &str = "0110";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlackModel {
    pub a: f64,
    pub b: f64,
}

impl Default for SlackModel {
    fn default() -> Self {
        SlackModel { a: 4.0, b: 64.0 }
    }
}

impl SlackModel {
    pub fn slack(&self, n: usize) -> f64 {
        self.a * (n.max(1) as f64).log2() + self.b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaId {
    /// `K(u | vw) <= K(u | v) + K(|v|)`
    #[serde(rename = "cond")]
    Cond,
    /// `I(u:w) <= I(uv:w)`
    #[serde(rename = "u:uv")]
    UUv,
    /// `K(u | w) <= K(u | f(w, v)) + K(v)`
    #[serde(rename = "proc")]
    Proc,
    /// `I(u:w) = I(w:u)`
    #[serde(rename = "sym1")]
    Sym1,
}

impl LemmaId {
    pub const ALL: [LemmaId; 4] = [LemmaId::Cond, LemmaId::UUv, LemmaId::Proc, LemmaId::Sym1];
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LemmaId::Cond => "cond",
            LemmaId::UUv => "u:uv",
            LemmaId::Proc => "proc",
            LemmaId::Sym1 => "sym1",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Triple {
    pub label: String,
    pub u: Str,
    pub v: Str,
    pub w: Str,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub spec: String,
    pub triples: Vec<Triple>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleFailure {
    pub index: usize,
    pub label: String,
    /// Amount by which the left side exceeds the right side plus slack.
    pub deficit_bits: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub pass_rate: f64,
    /// Largest `lhs - (rhs + slack)` over the corpus; negative means every
    /// triple passed with room to spare.
    pub worst_deficit_bits: f64,
    pub failures: Vec<TripleFailure>,
    pub slack_params: SlackModel,
    pub corpus_spec: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub proxy: String,
    pub corpus_spec: String,
    pub corpus_size: usize,
    pub slack_params: SlackModel,
    pub lemmas: Vec<LemmaReport>,
}

impl DiagnosticReport {
    pub fn lemma(&self, id: LemmaId) -> Option<&LemmaReport> {
        self.lemmas.iter().find(|l| l.lemma == id)
    }
}

fn uniform(seed: u64, n: usize) -> Str {
    SequenceGen::uniform(Alphabet::BINARY, seed).prefix(n)
}

fn mask(w: &Str) -> Str {
    let f = builtin(&format!("xor-mask:{PROC_MASK}"), Alphabet::BINARY).expect("builtin");
    apply(&f, Oracle::Str(w), w.len(), DEFAULT_BUDGET).expect("transducer covers its input")
}

/// The fixed, seeded binary corpus used by default.
pub fn default_corpus() -> Corpus {
    let mut triples = Vec::new();
    let mut push = |label: String, u: Str, v: Str, w: Str| triples.push(Triple { label, u, v, w });
    let empty = Str::empty(Alphabet::BINARY);
    let zeros = |n| SequenceGen::zeros(Alphabet::BINARY).prefix(n);
    for (i, &n) in [256usize, 1024, 4096].iter().enumerate() {
        let s = 100 * i as u64;
        let r = uniform(s + 1, n);
        push(format!("equal-{n}"), r.clone(), r.clone(), r.clone());
        push(format!("independent-{n}"), uniform(s + 2, n), uniform(s + 3, n), uniform(s + 4, n));
        push(format!("u=w-{n}"), r.clone(), uniform(s + 5, n / 2), r.clone());
        push(format!("masked-{n}"), mask(&r), empty.clone(), r.clone());
        push(format!("prefix-{n}"), r.truncated(n / 2), uniform(s + 6, n / 4), r.clone());
        push(format!("zeros-{n}"), zeros(n), zeros(n / 2), zeros(n));
        push(format!("zeros-vs-random-{n}"), zeros(n), r.truncated(n / 2), uniform(s + 7, n));
        for (j, q) in [0.05, 0.1, 0.25].into_iter().enumerate() {
            let dist = JointDistribution::binary_symmetric(q).expect("valid q");
            let (x, y) = coupled_gen(&dist, s + 10 + j as u64).expect("valid distribution");
            let (x, y) = (x.prefix(n), y.prefix(n));
            push(format!("bsc{q}-{n}"), x.clone(), x.truncated(n / 4), y.clone());
            push(format!("bsc{q}-masked-{n}"), mask(&y), empty.clone(), x);
        }
        push(format!("empty-v-{n}"), r.clone(), empty.clone(), uniform(s + 8, n));
    }
    Corpus {
        spec: "default: binary, lengths 256/1024/4096, seeded uniform and binary-symmetric triples"
            .into(),
        triples,
    }
}

fn concat(a: &Str, b: &Str) -> Str {
    a.concat(b).expect("corpus strings share an alphabet")
}

/// Returns `(lhs, rhs)`; the check is `lhs <= rhs + slack` (for `sym1`,
/// `lhs` is the absolute asymmetry and `rhs` is 0).
fn sides<P: ComplexityProxy + ?Sized>(lemma: LemmaId, t: &Triple, proxy: &P) -> (f64, f64) {
    let (u, v, w) = (&t.u, &t.v, &t.w);
    match lemma {
        LemmaId::Cond => (
            proxy.k_cond(u, &concat(v, w)),
            proxy.k_cond(u, v) + gamma_bits(v.len() as u64),
        ),
        LemmaId::UUv => {
            let i = |a: &Str| {
                mutual_info(a, w, proxy, Form::Definitional)
                    .expect("shared alphabet")
                    .value_bits
            };
            (i(u), i(&concat(u, v)))
        }
        LemmaId::Proc => (proxy.k_cond(u, w), proxy.k_cond(u, &mask(w)) + proxy.k_plain(v)),
        LemmaId::Sym1 => {
            let i = |a: &Str, b: &Str| {
                mutual_info(a, b, proxy, Form::Symmetric)
                    .expect("shared alphabet")
                    .value_bits
            };
            ((i(u, w) - i(w, u)).abs(), 0.0)
        }
    }
}

pub fn proxy_diagnostics<P: ComplexityProxy + ?Sized>(
    proxy: &P,
    corpus: &Corpus,
    slack: SlackModel,
) -> Result<DiagnosticReport, ProxyError> {
    if corpus.triples.is_empty() {
        return Err(ProxyError::EmptyCorpus);
    }
    let lemmas = LemmaId::ALL
        .iter()
        .map(|&lemma| {
            let deficits: Vec<f64> = corpus
                .triples
                .par_iter()
                .map(|t| {
                    let (lhs, rhs) = sides(lemma, t, proxy);
                    lhs - (rhs + slack.slack(t.u.len() + t.v.len() + t.w.len()))
                })
                .collect();
            let failures: Vec<TripleFailure> = deficits
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > 0.0)
                .map(|(index, &d)| TripleFailure {
                    index,
                    label: corpus.triples[index].label.clone(),
                    deficit_bits: d,
                })
                .collect();
            LemmaReport {
                lemma,
                pass_rate: 1.0 - failures.len() as f64 / deficits.len() as f64,
                worst_deficit_bits: deficits.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                failures,
                slack_params: slack,
                corpus_spec: corpus.spec.clone(),
            }
        })
        .collect();
    Ok(DiagnosticReport {
        proxy: proxy.name().to_string(),
        corpus_spec: corpus.spec.clone(),
        corpus_size: corpus.triples.len(),
        slack_params: slack,
        lemmas,
    })
}
