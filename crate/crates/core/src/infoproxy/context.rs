//! Adaptive context-model proxy.
//!
//! A model codes each symbol with Krichevsky–Trofimov estimates,
//! `log2(2t + k) - log2(2c + 1)` bits where `c` counts the symbol and `t` all
//! symbols seen in the same context. A context combines the last `h` symbols
//! (`h <= 2`), the position modulo a period `P <= 4` and, for conditional
//! costs, one auxiliary symbol `x[floor(i / s)]` (`s <= 4`). The proxy keeps the
//! cheapest model and pays for choosing it: 4 bits among the 12 plain models,
//! 7 among the 108 conditional ones. The conditional set also holds switching
//! variants that drop the auxiliary symbol after a chosen position, so extra
//! conditioning material never costs more than naming where it stops helping.
//!
//! Auxiliary positions never run ahead of the coded position, so the cost of
//! `y↾n` given `x↾n` is a running sum over one pass; [`ComplexityProxy::prefix_terms`]
//! uses that to evaluate every checkpoint at once.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::seq::{Str, Symbol};

use super::{gamma_bits, quantize, ComplexityProxy, PrefixTerms};

const HISTORIES: [usize; 3] = [0, 1, 2];
const PERIODS: [usize; 4] = [1, 2, 3, 4];
const STRIDES: [usize; 4] = [1, 2, 3, 4];
const PLAIN_MODEL_BITS: f64 = 4.0;
const COND_MODEL_BITS: f64 = 7.0;
const FLAT_TABLE_LIMIT: usize = 1 << 22;

#[derive(Clone, Copy, Debug, Default)]
pub struct ContextProxy;

enum Counts {
    Flat { counts: Vec<u32>, totals: Vec<u32> },
    Map(HashMap<usize, (u32, Vec<u32>)>),
}

struct Model {
    k: usize,
    h: usize,
    period: usize,
    hist_mod: usize,
}

/// Adaptive coder state for one model.
struct Coder<'m> {
    model: &'m Model,
    table: Counts,
    hist: usize,
    cost: f64,
}

impl<'m> Coder<'m> {
    fn new(model: &'m Model) -> Self {
        let ctxs = model.hist_mod * model.period * (model.k + 1);
        let table = if ctxs * model.k <= FLAT_TABLE_LIMIT {
            Counts::Flat {
                counts: vec![0; ctxs * model.k],
                totals: vec![0; ctxs],
            }
        } else {
            Counts::Map(HashMap::new())
        };
        Coder {
            model,
            table,
            // All-sentinel history.
            hist: model.hist_mod - 1,
            cost: 0.0,
        }
    }

    #[inline]
    fn step(&mut self, i: usize, a: Symbol, aux_sym: usize, log2: &[f64]) {
        let m = self.model;
        let k = m.k;
        let ctx = (self.hist * m.period + i % m.period) * (k + 1) + aux_sym;
        let (c, t) = match &mut self.table {
            Counts::Flat { counts, totals } => {
                let slot = &mut counts[ctx * k + a as usize];
                let c = *slot;
                *slot += 1;
                let t = totals[ctx];
                totals[ctx] += 1;
                (c, t)
            }
            Counts::Map(map) => {
                let e = map.entry(ctx).or_insert_with(|| (0, vec![0; k]));
                let c = e.1[a as usize];
                let t = e.0;
                e.1[a as usize] += 1;
                e.0 += 1;
                (c, t)
            }
        };
        self.cost += log2[2 * t as usize + k] - log2[2 * c as usize + 1];
        if m.h > 0 {
            self.hist = (self.hist * (k + 1) + a as usize) % m.hist_mod;
        }
    }
}

fn aux_symbol(aux: Option<(&[Symbol], usize)>, i: usize, k: usize) -> usize {
    match aux {
        Some((x, s)) => x.get(i / s).map_or(k, |&v| v as usize),
        None => k,
    }
}

/// Evaluates `value_at` at every length `0..=len` in order and keeps the
/// values at the (sorted) checkpoints.
fn sample(checkpoints: &[usize], len: usize, mut value_at: impl FnMut(usize) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for pos in 0..=len {
        let v = value_at(pos);
        while next.peek().is_some_and(|&&c| c == pos) {
            out.push(v);
            next.next();
        }
    }
    out
}

impl Model {
    /// Running cost of `seq` sampled at each checkpoint length.
    fn pass(
        &self,
        seq: &[Symbol],
        aux: Option<(&[Symbol], usize)>,
        checkpoints: &[usize],
        log2: &[f64],
    ) -> Vec<f64> {
        let k = self.k;
        let mut coder = Coder::new(self);
        sample(checkpoints, seq.len(), |pos| {
            if pos > 0 {
                coder.step(pos - 1, seq[pos - 1], aux_symbol(aux, pos - 1, k), log2);
            }
            coder.cost
        })
    }

    /// Codes the first `m` symbols with the auxiliary model and the rest with
    /// the plain one (trained on the whole history), paying `gamma(m)` for the
    /// switch point; `m` is chosen per checkpoint. Never switching is allowed.
    fn switch_pass(
        &self,
        seq: &[Symbol],
        aux: (&[Symbol], usize),
        checkpoints: &[usize],
        log2: &[f64],
    ) -> Vec<f64> {
        let k = self.k;
        let mut with_aux = Coder::new(self);
        let mut plain = Coder::new(self);
        let mut best_switch = gamma_bits(0);
        sample(checkpoints, seq.len(), |pos| {
            if pos > 0 {
                let i = pos - 1;
                with_aux.step(i, seq[i], aux_symbol(Some(aux), i, k), log2);
                plain.step(i, seq[i], k, log2);
                best_switch = best_switch.min(with_aux.cost - plain.cost + gamma_bits(pos as u64));
            }
            with_aux.cost.min(best_switch + plain.cost)
        })
    }
}

fn models(k: usize) -> impl Iterator<Item = Model> {
    HISTORIES.iter().flat_map(move |&h| {
        PERIODS.iter().map(move |&period| Model {
            k,
            h,
            period,
            hist_mod: (k + 1).pow(h as u32),
        })
    })
}

fn log2_table(len: usize, k: usize) -> Vec<f64> {
    (0..2 * len + k + 2).map(|v| (v as f64).log2()).collect()
}

/// Elementwise minimum over model passes, plus the model-choice cost.
fn best(passes: Vec<Vec<f64>>, model_bits: f64, checkpoints: &[usize]) -> Vec<f64> {
    checkpoints
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            if n == 0 {
                return 0.0;
            }
            let m = passes.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
            quantize(model_bits + m)
        })
        .collect()
}

fn plain_costs(x: &[Symbol], k: usize, checkpoints: &[usize], log2: &[f64]) -> Vec<f64> {
    let passes = models(k).map(|m| m.pass(x, None, checkpoints, log2)).collect();
    best(passes, PLAIN_MODEL_BITS, checkpoints)
}

/// Costs of `y↾n` given `x`, one per checkpoint.
fn cond_costs(y: &[Symbol], x: &[Symbol], k: usize, checkpoints: &[usize], log2: &[f64]) -> Vec<f64> {
    let mut passes: Vec<Vec<f64>> = models(k).map(|m| m.pass(y, None, checkpoints, log2)).collect();
    for s in STRIDES {
        passes.extend(models(k).map(|m| m.pass(y, Some((x, s)), checkpoints, log2)));
        passes.extend(models(k).map(|m| m.switch_pass(y, (x, s), checkpoints, log2)));
    }
    best(passes, COND_MODEL_BITS, checkpoints)
}

fn joint(kx: f64, ky: f64, y_given_x: f64, x_given_y: f64, lx: usize, ly: usize) -> f64 {
    if lx == 0 {
        return ky;
    }
    if ly == 0 {
        return kx;
    }
    let forward = kx + y_given_x + gamma_bits(lx as u64);
    let backward = ky + x_given_y + gamma_bits(ly as u64);
    forward.min(backward).max(kx).max(ky)
}

impl ComplexityProxy for ContextProxy {
    fn name(&self) -> &str {
        "ctx"
    }

    fn k_plain(&self, x: &Str) -> f64 {
        let k = x.alphabet().size();
        plain_costs(x.symbols(), k, &[x.len()], &log2_table(x.len(), k))[0]
    }

    fn k_cond(&self, y: &Str, x: &Str) -> f64 {
        let k = y.alphabet().size();
        cond_costs(y.symbols(), x.symbols(), k, &[y.len()], &log2_table(y.len(), k))[0]
    }

    fn k_joint(&self, x: &Str, y: &Str) -> f64 {
        joint(
            self.k_plain(x),
            self.k_plain(y),
            self.k_cond(y, x),
            self.k_cond(x, y),
            x.len(),
            y.len(),
        )
    }

    fn prefix_terms(&self, x: &Str, y: &Str, ns: &[usize]) -> Vec<PrefixTerms> {
        let k = x.alphabet().size();
        let len = x.len().max(y.len());
        let log2 = log2_table(len, k);
        let mut sorted: Vec<usize> = ns.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let (xs, ys) = (x.symbols(), y.symbols());
        let jobs: Vec<Box<dyn Fn() -> Vec<f64> + Send + Sync>> = vec![
            Box::new(|| plain_costs(xs, k, &sorted, &log2)),
            Box::new(|| plain_costs(ys, k, &sorted, &log2)),
            Box::new(|| cond_costs(ys, xs, k, &sorted, &log2)),
            Box::new(|| cond_costs(xs, ys, k, &sorted, &log2)),
        ];
        let r: Vec<Vec<f64>> = jobs.par_iter().map(|job| job()).collect();
        ns.iter()
            .map(|&n| {
                let j = sorted.binary_search(&n).expect("checkpoint present");
                let (kx, ky) = (r[0][j], r[1][j]);
                PrefixTerms {
                    n,
                    kx,
                    ky,
                    kxy: joint(kx, ky, r[2][j], r[3][j], n, n),
                }
            })
            .collect()
    }
}
