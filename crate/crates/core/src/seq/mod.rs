//! Alphabets, finite strings, and the deterministic sequence generators used
//! as oracles and as experiment inputs.

mod gen;
mod io;
mod string;
mod uri;

pub use gen::{
    computable_gen, coupled_gen, ComputableKind, GenKind, JointDistribution, SequenceGen, Side,
};
pub use io::{read_sequence, read_sequence_file, write_sequence, write_sequence_file};
pub use string::{pair, unpair, Str};
pub use uri::GenSpec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single symbol. Alphabets hold at most 256 symbols.
pub type Symbol = u8;

#[derive(Debug, Error)]
pub enum SeqError {
    #[error("alphabet size {0} is outside 2..=256")]
    AlphabetSize(usize),
    #[error("symbol {symbol} is not in an alphabet of size {k}")]
    SymbolOutOfRange { symbol: usize, k: usize },
    #[error("alphabet mismatch: {left} vs {right} symbols")]
    AlphabetMismatch { left: usize, right: usize },
    #[error("malformed pair encoding: {0}")]
    MalformedPair(String),
    #[error("invalid joint distribution: {0}")]
    InvalidDistribution(String),
    #[error("unknown generator kind `{0}`")]
    UnknownKind(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("derived sequence diverged at length {0}")]
    Diverged(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The symbol set `{0, .., k-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet {
    k: u16,
}

impl Alphabet {
    pub const BINARY: Alphabet = Alphabet { k: 2 };

    pub fn new(k: usize) -> Result<Self, SeqError> {
        if (2..=256).contains(&k) {
            Ok(Alphabet { k: k as u16 })
        } else {
            Err(SeqError::AlphabetSize(k))
        }
    }

    pub fn size(self) -> usize {
        self.k as usize
    }

    pub fn contains(self, s: Symbol) -> bool {
        (s as usize) < self.size()
    }

    /// `ceil(log2 k)`: bits needed to write one raw symbol.
    pub fn symbol_bits(self) -> u32 {
        ceil_log2(self.size() as u64)
    }

    /// `log2 k` as used in dimension densities.
    pub fn log2_size(self) -> f64 {
        (self.size() as f64).log2()
    }

    pub fn check_same(self, other: Alphabet) -> Result<(), SeqError> {
        if self == other {
            Ok(())
        } else {
            Err(SeqError::AlphabetMismatch {
                left: self.size(),
                right: other.size(),
            })
        }
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = SeqError;
    fn try_from(k: usize) -> Result<Self, SeqError> {
        Alphabet::new(k)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.size()
    }
}

/// `ceil(log2 v)` with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_bounds() {
        assert!(Alphabet::new(1).is_err());
        assert!(Alphabet::new(257).is_err());
        assert_eq!(Alphabet::new(256).unwrap().symbol_bits(), 8);
        assert_eq!(Alphabet::new(3).unwrap().symbol_bits(), 2);
        assert_eq!(Alphabet::BINARY.symbol_bits(), 1);
    }

    #[test]
    fn ceil_log2_small_values() {
        let expect = [0, 0, 1, 2, 2, 3, 3, 3, 3, 4];
        for (v, e) in expect.iter().enumerate() {
            assert_eq!(ceil_log2(v as u64), *e, "v={v}");
        }
    }
}
