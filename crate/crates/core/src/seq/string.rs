use std::fmt;

use super::{Alphabet, SeqError, Symbol};

/// A finite string over an [`Alphabet`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Str {
    alphabet: Alphabet,
    symbols: Vec<Symbol>,
}

impl Str {
    pub fn new(alphabet: Alphabet, symbols: Vec<Symbol>) -> Result<Self, SeqError> {
        if let Some(&bad) = symbols.iter().find(|&&s| !alphabet.contains(s)) {
            return Err(SeqError::SymbolOutOfRange {
                symbol: bad as usize,
                k: alphabet.size(),
            });
        }
        Ok(Str { alphabet, symbols })
    }

    /// Caller guarantees every symbol is in range.
    pub(crate) fn from_trusted(alphabet: Alphabet, symbols: Vec<Symbol>) -> Self {
        debug_assert!(symbols.iter().all(|&s| alphabet.contains(s)));
        Str { alphabet, symbols }
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Str {
            alphabet,
            symbols: Vec::new(),
        }
    }

    /// Binary string from `0`/`1` text. Convenience for tests and fixtures.
    pub fn binary(text: &str) -> Result<Self, SeqError> {
        Str::parse(text, Alphabet::BINARY)
    }

    /// Parses symbol text: one digit per symbol when `k <= 10`, otherwise
    /// comma-separated integers. Whitespace is ignored.
    pub fn parse(text: &str, alphabet: Alphabet) -> Result<Self, SeqError> {
        let mut symbols = Vec::new();
        if alphabet.size() <= 10 {
            for c in text.chars().filter(|c| !c.is_whitespace()) {
                let d = c
                    .to_digit(10)
                    .ok_or_else(|| SeqError::Parse(format!("unexpected character {c:?}")))?;
                symbols.push(d as usize);
            }
        } else {
            for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let v: usize = tok
                    .parse()
                    .map_err(|_| SeqError::Parse(format!("bad symbol {tok:?}")))?;
                symbols.push(v);
            }
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= alphabet.size()) {
            return Err(SeqError::SymbolOutOfRange {
                symbol: bad,
                k: alphabet.size(),
            });
        }
        Ok(Str::from_trusted(
            alphabet,
            symbols.into_iter().map(|s| s as Symbol).collect(),
        ))
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    pub fn get(&self, i: usize) -> Option<Symbol> {
        self.symbols.get(i).copied()
    }

    /// `self ⊑ other`.
    pub fn is_prefix_of(&self, other: &Str) -> bool {
        self.alphabet == other.alphabet && other.symbols.starts_with(&self.symbols)
    }

    /// The first `min(n, |self|)` symbols.
    pub fn truncated(&self, n: usize) -> Str {
        Str::from_trusted(self.alphabet, self.symbols[..n.min(self.len())].to_vec())
    }

    pub fn concat(&self, other: &Str) -> Result<Str, SeqError> {
        self.alphabet.check_same(other.alphabet)?;
        let mut symbols = Vec::with_capacity(self.len() + other.len());
        symbols.extend_from_slice(&self.symbols);
        symbols.extend_from_slice(&other.symbols);
        Ok(Str::from_trusted(self.alphabet, symbols))
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Str {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet.size() <= 10 {
            for &s in &self.symbols {
                write!(f, "{}", s)?;
            }
            Ok(())
        } else {
            for (i, s) in self.symbols.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", s)?;
            }
            Ok(())
        }
    }
}

/// Self-delimiting pairing: `|x|` ones, a zero, then `x`, then `y`.
pub fn pair(x: &Str, y: &Str) -> Result<Str, SeqError> {
    x.alphabet.check_same(y.alphabet)?;
    let mut symbols = Vec::with_capacity(2 * x.len() + y.len() + 1);
    symbols.resize(x.len(), 1);
    symbols.push(0);
    symbols.extend_from_slice(&x.symbols);
    symbols.extend_from_slice(&y.symbols);
    Ok(Str::from_trusted(x.alphabet, symbols))
}

/// Inverse of [`pair`].
pub fn unpair(p: &Str) -> Result<(Str, Str), SeqError> {
    let header = p.symbols.iter().take_while(|&&s| s == 1).count();
    match p.symbols.get(header) {
        Some(0) => {}
        _ => {
            return Err(SeqError::MalformedPair(
                "header is not terminated by 0".into(),
            ))
        }
    }
    let body = &p.symbols[header + 1..];
    if body.len() < header {
        return Err(SeqError::MalformedPair(format!(
            "header announces {header} symbols but only {} follow",
            body.len()
        )));
    }
    let (x, y) = body.split_at(header);
    Ok((
        Str::from_trusted(p.alphabet, x.to_vec()),
        Str::from_trusted(p.alphabet, y.to_vec()),
    ))
}
