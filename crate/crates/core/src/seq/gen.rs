use std::fmt;
use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Alphabet, SeqError, Str, Symbol};
use crate::functional::{self, Oracle, TuringFunctional};

const DIST_TOLERANCE: f64 = 1e-12;

/// Joint law of one coupled symbol pair `(X[i], Y[i])`, stored row-major:
/// `p[a * k + b] = Pr[X[i] = a, Y[i] = b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    alphabet: Alphabet,
    p: Vec<f64>,
}

impl JointDistribution {
    pub fn new(alphabet: Alphabet, p: Vec<f64>) -> Result<Self, SeqError> {
        let k = alphabet.size();
        if p.len() != k * k {
            return Err(SeqError::InvalidDistribution(format!(
                "expected {} entries, got {}",
                k * k,
                p.len()
            )));
        }
        if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(SeqError::InvalidDistribution(format!(
                "entry {bad} is negative or not finite"
            )));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > DIST_TOLERANCE {
            return Err(SeqError::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(JointDistribution { alphabet, p })
    }

    /// `Y = X`, uniform marginals.
    pub fn diagonal(alphabet: Alphabet) -> Self {
        let k = alphabet.size();
        let mut p = vec![0.0; k * k];
        for a in 0..k {
            p[a * k + a] = 1.0 / k as f64;
        }
        JointDistribution { alphabet, p }
    }

    pub fn independent_uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.size();
        JointDistribution {
            alphabet,
            p: vec![1.0 / (k * k) as f64; k * k],
        }
    }

    pub fn product(px: &[f64], py: &[f64]) -> Result<Self, SeqError> {
        if px.len() != py.len() {
            return Err(SeqError::InvalidDistribution(
                "marginals have different sizes".into(),
            ));
        }
        let alphabet = Alphabet::new(px.len())?;
        let p = px
            .iter()
            .flat_map(|a| py.iter().map(move |b| a * b))
            .collect();
        JointDistribution::new(alphabet, p)
    }

    /// Uniform binary `X`, and `Y = X` flipped independently with probability `q`.
    pub fn binary_symmetric(q: f64) -> Result<Self, SeqError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(SeqError::InvalidDistribution(format!(
                "flip probability {q} outside [0, 1]"
            )));
        }
        JointDistribution::new(
            Alphabet::BINARY,
            vec![(1.0 - q) / 2.0, q / 2.0, q / 2.0, (1.0 - q) / 2.0],
        )
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// Row-major cumulative table; the last entry is pinned to 1.
    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut c: Vec<f64> = self
            .p
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        if let Some(last) = c.last_mut() {
            *last = 1.0;
        }
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComputableKind {
    Zeros,
    Alternating,
    Champernowne,
}

impl ComputableKind {
    pub fn parse(name: &str) -> Result<Self, SeqError> {
        match name {
            "zeros" => Ok(ComputableKind::Zeros),
            "alternating" => Ok(ComputableKind::Alternating),
            "champernowne" => Ok(ComputableKind::Champernowne),
            other => Err(SeqError::UnknownKind(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComputableKind::Zeros => "zeros",
            ComputableKind::Alternating => "alternating",
            ComputableKind::Champernowne => "champernowne",
        }
    }
}

#[derive(Clone)]
pub enum GenKind {
    /// One side of an i.i.d. coupled pair stream.
    Coupled {
        dist: Arc<JointDistribution>,
        seed: u64,
        side: Side,
    },
    Computable(ComputableKind),
    /// File contents, repeated periodically past the end.
    File { symbols: Arc<Vec<Symbol>> },
    /// `Φ^source`.
    Derived {
        functional: Arc<TuringFunctional>,
        source: Arc<SequenceGen>,
        budget: u64,
    },
}

/// A deterministic infinite sequence exposing prefix access.
///
/// Pseudorandom kinds draw one `u64` per position from ChaCha8 seeded with
/// `ChaCha8Rng::seed_from_u64(seed)`; the top 53 bits give a uniform `f64`
/// that is looked up in the row-major cumulative joint table. Prefixes are
/// therefore identical on every platform.
#[derive(Clone)]
pub struct SequenceGen {
    alphabet: Alphabet,
    kind: GenKind,
}

impl fmt::Debug for SequenceGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SequenceGen({})", self.describe())
    }
}

impl SequenceGen {
    pub fn computable(kind: ComputableKind, alphabet: Alphabet) -> Self {
        SequenceGen {
            alphabet,
            kind: GenKind::Computable(kind),
        }
    }

    pub fn zeros(alphabet: Alphabet) -> Self {
        SequenceGen::computable(ComputableKind::Zeros, alphabet)
    }

    /// Uniform i.i.d. symbols.
    pub fn uniform(alphabet: Alphabet, seed: u64) -> Self {
        SequenceGen {
            alphabet,
            kind: GenKind::Coupled {
                dist: Arc::new(JointDistribution::independent_uniform(alphabet)),
                seed,
                side: Side::X,
            },
        }
    }

    pub fn from_symbols(s: &Str) -> Result<Self, SeqError> {
        if s.is_empty() {
            return Err(SeqError::Parse("file-backed sequence is empty".into()));
        }
        Ok(SequenceGen {
            alphabet: s.alphabet(),
            kind: GenKind::File {
                symbols: Arc::new(s.symbols().to_vec()),
            },
        })
    }

    pub fn derived(
        functional: Arc<TuringFunctional>,
        source: SequenceGen,
        budget: u64,
    ) -> Result<Self, SeqError> {
        functional.alphabet().check_same(source.alphabet)?;
        Ok(SequenceGen {
            alphabet: source.alphabet,
            kind: GenKind::Derived {
                functional,
                source: Arc::new(source),
                budget,
            },
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn kind(&self) -> &GenKind {
        &self.kind
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            GenKind::Coupled { seed, side, .. } => {
                format!("coupled(k={}, seed={seed}, side={side:?})", self.alphabet.size())
            }
            GenKind::Computable(c) => format!("{}(k={})", c.name(), self.alphabet.size()),
            GenKind::File { symbols } => format!("file(len={})", symbols.len()),
            GenKind::Derived {
                functional, source, ..
            } => format!("{}^{}", functional.name(), source.describe()),
        }
    }

    /// The first `n` symbols.
    ///
    /// # Panics
    ///
    /// Panics if a derived generator's functional diverges before producing
    /// `n` symbols; use [`SequenceGen::try_prefix`] to handle that case.
    pub fn prefix(&self, n: usize) -> Str {
        self.try_prefix(n)
            .unwrap_or_else(|e| panic!("{}: {e}", self.describe()))
    }

    pub fn try_prefix(&self, n: usize) -> Result<Str, SeqError> {
        let symbols = match &self.kind {
            GenKind::Coupled { dist, seed, side } => coupled_prefix(dist, *seed, *side, n),
            GenKind::Computable(kind) => computable_prefix(*kind, self.alphabet, n),
            GenKind::File { symbols } => symbols.iter().copied().cycle().take(n).collect(),
            GenKind::Derived {
                functional,
                source,
                budget,
            } => {
                return functional::apply(functional, Oracle::Seq(source), n, *budget)
                    .map_err(|_| SeqError::Diverged(n))
            }
        };
        Ok(Str::from_trusted(self.alphabet, symbols))
    }
}

fn coupled_prefix(dist: &JointDistribution, seed: u64, side: Side, n: usize) -> Vec<Symbol> {
    let k = dist.alphabet.size();
    let cumulative = dist.cumulative();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            let cell = cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(cumulative.len() - 1);
            let sym = match side {
                Side::X => cell / k,
                Side::Y => cell % k,
            };
            sym as Symbol
        })
        .collect()
}

fn computable_prefix(kind: ComputableKind, alphabet: Alphabet, n: usize) -> Vec<Symbol> {
    match kind {
        ComputableKind::Zeros => vec![0; n],
        ComputableKind::Alternating => (0..n).map(|i| (i % 2) as Symbol).collect(),
        ComputableKind::Champernowne => {
            let k = alphabet.size() as u64;
            let mut out = Vec::with_capacity(n);
            let mut numeral = 0u64;
            let mut digits = Vec::new();
            while out.len() < n {
                digits.clear();
                let mut v = numeral;
                loop {
                    digits.push((v % k) as Symbol);
                    v /= k;
                    if v == 0 {
                        break;
                    }
                }
                out.extend(digits.iter().rev().take(n - out.len()));
                numeral += 1;
            }
            out
        }
    }
}

/// Two generators whose position-wise pairs are i.i.d. draws from `dist`.
pub fn coupled_gen(
    dist: &JointDistribution,
    seed: u64,
) -> Result<(SequenceGen, SequenceGen), SeqError> {
    // Revalidate: the fields are public through serde.
    let dist = Arc::new(JointDistribution::new(dist.alphabet, dist.p.clone())?);
    let make = |side| SequenceGen {
        alphabet: dist.alphabet,
        kind: GenKind::Coupled {
            dist: Arc::clone(&dist),
            seed,
            side,
        },
    };
    Ok((make(Side::X), make(Side::Y)))
}

pub fn computable_gen(kind: &str, alphabet: Alphabet) -> Result<SequenceGen, SeqError> {
    Ok(SequenceGen::computable(ComputableKind::parse(kind)?, alphabet))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn text(g: &SequenceGen, n: usize) -> String {
        g.prefix(n).to_string()
    }

    #[test]
    fn computable_examples() {
        let b = Alphabet::BINARY;
        assert_eq!(text(&computable_gen("zeros", b).unwrap(), 0), "");
        assert_eq!(text(&computable_gen("zeros", b).unwrap(), 4), "0000");
        assert_eq!(text(&computable_gen("zeros", b).unwrap(), 5), "00000");
        assert_eq!(text(&computable_gen("alternating", b).unwrap(), 5), "01010");
        assert!(computable_gen("primes", b).is_err());
    }

    #[test]
    fn champernowne_matches_numeral_concatenation() {
        for k in [2usize, 3, 10] {
            let a = Alphabet::new(k).unwrap();
            let mut oracle = String::new();
            for v in 0..200u32 {
                let mut digits = vec![];
                let mut x = v;
                loop {
                    digits.push(std::char::from_digit(x % k as u32, 10).unwrap());
                    x /= k as u32;
                    if x == 0 {
                        break;
                    }
                }
                oracle.extend(digits.iter().rev());
            }
            let g = computable_gen("champernowne", a).unwrap();
            assert_eq!(text(&g, 300), oracle[..300]);
        }
        let g = computable_gen("champernowne", Alphabet::BINARY).unwrap();
        assert_eq!(text(&g, 10), "0110111001");
    }

    #[test]
    fn diagonal_coupling_gives_identical_sequences() {
        let (x, y) = coupled_gen(&JointDistribution::diagonal(Alphabet::BINARY), 9).unwrap();
        assert_eq!(x.prefix(8), y.prefix(8));
        assert_eq!(x.prefix(4096), y.prefix(4096));
    }

    #[test]
    fn seeded_prefixes_are_deterministic() {
        let (x, _) = coupled_gen(&JointDistribution::binary_symmetric(0.3).unwrap(), 77).unwrap();
        assert_eq!(x.prefix(16), x.prefix(16));
        let (x2, _) = coupled_gen(&JointDistribution::binary_symmetric(0.3).unwrap(), 77).unwrap();
        assert_eq!(x.prefix(1000), x2.prefix(1000));
        let (x3, _) = coupled_gen(&JointDistribution::binary_symmetric(0.3).unwrap(), 78).unwrap();
        assert_ne!(x.prefix(1000), x3.prefix(1000));
    }

    #[test]
    fn pinned_chacha_prefix() {
        // Frozen from the first run; guards cross-version reproducibility.
        let g = SequenceGen::uniform(Alphabet::BINARY, 1);
        assert_eq!(text(&g, 32), PINNED_UNIFORM_SEED1);
    }
    const PINNED_UNIFORM_SEED1: &str = "00100100110100001110000000100011";

    #[test]
    fn product_distribution_frequencies() {
        let dist = JointDistribution::product(&[0.3, 0.7], &[0.6, 0.4]).unwrap();
        let (x, y) = coupled_gen(&dist, 2024).unwrap();
        let n = 1 << 16;
        let (xs, ys) = (x.prefix(n), y.prefix(n));
        let mut counts = [0usize; 4];
        for (a, b) in xs.symbols().iter().zip(ys.symbols()) {
            counts[(*a as usize) * 2 + *b as usize] += 1;
        }
        for (c, p) in counts.iter().zip(dist.probabilities()) {
            let freq = *c as f64 / n as f64;
            assert!((freq - p).abs() < 0.02, "freq {freq} vs {p}");
        }
    }

    #[test]
    fn binary_symmetric_flip_rate() {
        let (x, y) = coupled_gen(&JointDistribution::binary_symmetric(0.1).unwrap(), 5).unwrap();
        let n = 1 << 16;
        let d = x
            .prefix(n)
            .symbols()
            .iter()
            .zip(y.prefix(n).symbols())
            .filter(|(a, b)| a != b)
            .count();
        let rate = d as f64 / n as f64;
        assert!((0.08..=0.12).contains(&rate), "rate {rate}");
    }

    #[test]
    fn invalid_distributions_rejected() {
        assert!(JointDistribution::new(Alphabet::BINARY, vec![0.5, 0.5, 0.1, -0.1]).is_err());
        assert!(JointDistribution::new(Alphabet::BINARY, vec![0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(JointDistribution::new(Alphabet::BINARY, vec![0.5, 0.5]).is_err());
        assert!(JointDistribution::binary_symmetric(1.5).is_err());
    }

    #[test]
    fn file_backed_sequences_repeat() {
        let s = Str::binary("011").unwrap();
        let g = SequenceGen::from_symbols(&s).unwrap();
        assert_eq!(text(&g, 7), "0110110");
        assert!(SequenceGen::from_symbols(&Str::empty(Alphabet::BINARY)).is_err());
    }

    proptest! {
        #[test]
        fn prefixes_are_monotone(seed in any::<u64>(), n in 0usize..300, which in 0usize..5) {
            let a = Alphabet::new(3).unwrap();
            let g = match which {
                0 => SequenceGen::uniform(a, seed),
                1 => coupled_gen(&JointDistribution::diagonal(a), seed).unwrap().1,
                2 => computable_gen("champernowne", a).unwrap(),
                3 => computable_gen("alternating", a).unwrap(),
                _ => computable_gen("zeros", a).unwrap(),
            };
            let p = g.prefix(n);
            let q = g.prefix(n + 1);
            prop_assert_eq!(p.len(), n);
            prop_assert!(p.is_prefix_of(&q));
        }
    }
}
