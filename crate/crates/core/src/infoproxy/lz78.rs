use std::collections::HashMap;

use crate::seq::{ceil_log2, pair, Str, Symbol};

use super::{quantize, ComplexityProxy};

/// Phrase trie. Node 0 is the root; child index 0 means "absent".
enum Trie {
    Flat { k: usize, children: Vec<u32> },
    Map(HashMap<(u32, Symbol), u32>),
}

impl Trie {
    fn new(k: usize, capacity: usize) -> Self {
        if k <= 16 {
            let mut children = Vec::with_capacity((capacity + 1) * k);
            children.resize(k, 0);
            Trie::Flat { k, children }
        } else {
            Trie::Map(HashMap::with_capacity(capacity))
        }
    }

    #[inline]
    fn child(&self, node: u32, a: Symbol) -> Option<u32> {
        match self {
            Trie::Flat { k, children } => match children[node as usize * k + a as usize] {
                0 => None,
                c => Some(c),
            },
            Trie::Map(m) => m.get(&(node, a)).copied(),
        }
    }

    /// Adds a child and returns its index (= number of phrases so far).
    #[inline]
    fn add(&mut self, node: u32, a: Symbol, next: u32) {
        match self {
            Trie::Flat { k, children } => {
                children[node as usize * *k + a as usize] = next;
                children.resize(children.len() + *k, 0);
            }
            Trie::Map(m) => {
                m.insert((node, a), next);
            }
        }
    }
}

struct Parser {
    trie: Trie,
    phrases: u32,
    symbol_bits: u64,
}

impl Parser {
    fn new(k: usize, capacity: usize) -> Self {
        Parser {
            trie: Trie::new(k, capacity),
            phrases: 0,
            symbol_bits: ceil_log2(k as u64) as u64,
        }
    }

    /// Parses `s` into the shared dictionary; returns the code length of the
    /// new phrases (plus a trailing partial phrase).
    fn parse(&mut self, s: &[Symbol]) -> u64 {
        let mut bits = 0u64;
        let mut node = 0u32;
        for &a in s {
            match self.trie.child(node, a) {
                Some(c) => node = c,
                None => {
                    self.phrases += 1;
                    self.trie.add(node, a, self.phrases);
                    bits += ceil_log2(self.phrases as u64) as u64 + self.symbol_bits;
                    node = 0;
                }
            }
        }
        if node != 0 {
            bits += self.symbol_bits;
        }
        bits
    }
}

/// LZ78 code length: phrase `i` costs `ceil(log2 i) + ceil(log2 k)` bits,
/// and a trailing partial phrase costs `ceil(log2 k)`.
pub fn lz78_bits(x: &Str) -> u64 {
    Parser::new(x.alphabet().size(), x.len()).parse(x.symbols())
}

/// Code length of `y` after `x` has been parsed into the dictionary for free.
pub fn lz78_primed_bits(y: &Str, x: &Str) -> u64 {
    let mut p = Parser::new(y.alphabet().size(), x.len() + y.len());
    p.parse(x.symbols());
    p.parse(y.symbols())
}

/// LZ78 proxy. The joint is symmetrized over the two pair orders and never
/// below either marginal; pairing with the empty string costs nothing.
/// `primed` switches the conditional to [`lz78_primed_bits`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Lz78Proxy {
    pub primed: bool,
}

impl ComplexityProxy for Lz78Proxy {
    fn name(&self) -> &str {
        if self.primed {
            "lz78-primed"
        } else {
            "lz78"
        }
    }

    fn k_plain(&self, x: &Str) -> f64 {
        lz78_bits(x) as f64
    }

    fn k_joint(&self, x: &Str, y: &Str) -> f64 {
        if x.is_empty() || y.is_empty() {
            return (lz78_bits(x) + lz78_bits(y)) as f64;
        }
        let xy = lz78_bits(&pair(x, y).expect("shared alphabet"));
        let yx = lz78_bits(&pair(y, x).expect("shared alphabet"));
        let j = xy.min(yx).max(lz78_bits(x)).max(lz78_bits(y));
        quantize(j as f64)
    }

    fn k_cond(&self, y: &Str, x: &Str) -> f64 {
        if self.primed {
            lz78_primed_bits(y, x) as f64
        } else {
            (self.k_joint(x, y) - self.k_plain(x)).max(0.0)
        }
    }
}
