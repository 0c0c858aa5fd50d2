use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    coupled_gen, read_sequence_file, Alphabet, ComputableKind, JointDistribution, SeqError,
    SequenceGen, Side,
};

/// A generator reference of the form `gen:<kind>?key=value&key=value`.
///
/// | kind | parameters |
/// |------|------------|
/// | `zeros`, `alternating`, `champernowne` | `k` (default 2) |
/// | `uniform` | `k`, `seed` |
/// | `bsc` | `q`, `seed`, `side=x\|y` (binary symmetric coupling) |
/// | `identical` | `k`, `seed`, `side` (diagonal coupling) |
/// | `coupled` | `k`, `p` (k*k comma-separated, row-major), `seed`, `side` |
/// | `file` | `path` |
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GenSpec {
    kind: String,
    params: BTreeMap<String, String>,
}

impl GenSpec {
    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    /// A copy with `seed` replaced.
    pub fn with_seed(&self, seed: u64) -> GenSpec {
        let mut s = self.clone();
        s.params.insert("seed".into(), seed.to_string());
        s
    }

    fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T, SeqError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| SeqError::Parse(format!("bad value {v:?} for `{key}`"))),
        }
    }

    fn side(&self) -> Result<Side, SeqError> {
        match self.param("side").unwrap_or("x") {
            "x" | "X" => Ok(Side::X),
            "y" | "Y" => Ok(Side::Y),
            other => Err(SeqError::Parse(format!("bad side {other:?}"))),
        }
    }

    pub fn build(&self) -> Result<SequenceGen, SeqError> {
        let alphabet = Alphabet::new(self.parsed("k", 2usize)?)?;
        let seed = self.parsed("seed", 0u64)?;
        match self.kind.as_str() {
            "zeros" | "alternating" | "champernowne" => Ok(SequenceGen::computable(
                ComputableKind::parse(&self.kind)?,
                alphabet,
            )),
            "uniform" => Ok(SequenceGen::uniform(alphabet, seed)),
            "bsc" => {
                let q = self.parsed("q", 0.0f64)?;
                let dist = JointDistribution::binary_symmetric(q)?;
                pick(coupled_gen(&dist, seed)?, self.side()?)
            }
            "identical" => pick(
                coupled_gen(&JointDistribution::diagonal(alphabet), seed)?,
                self.side()?,
            ),
            "coupled" => {
                let p = self
                    .param("p")
                    .ok_or_else(|| SeqError::Parse("coupled generator needs `p`".into()))?
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| SeqError::Parse(format!("bad probability {v:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let dist = JointDistribution::new(alphabet, p)?;
                pick(coupled_gen(&dist, seed)?, self.side()?)
            }
            "file" => {
                let path = self
                    .param("path")
                    .ok_or_else(|| SeqError::Parse("file generator needs `path`".into()))?;
                SequenceGen::from_symbols(&read_sequence_file(path)?)
            }
            other => Err(SeqError::UnknownKind(other.to_string())),
        }
    }
}

fn pick(pair: (SequenceGen, SequenceGen), side: Side) -> Result<SequenceGen, SeqError> {
    Ok(match side {
        Side::X => pair.0,
        Side::Y => pair.1,
    })
}

impl FromStr for GenSpec {
    type Err = SeqError;

    fn from_str(s: &str) -> Result<Self, SeqError> {
        let rest = s
            .strip_prefix("gen:")
            .ok_or_else(|| SeqError::Parse(format!("generator spec must start with `gen:`: {s}")))?;
        let (kind, query) = match rest.split_once('?') {
            Some((k, q)) => (k, q),
            None => (rest, ""),
        };
        if kind.is_empty() {
            return Err(SeqError::Parse("empty generator kind".into()));
        }
        let mut params = BTreeMap::new();
        for part in query.split('&').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| SeqError::Parse(format!("parameter without `=`: {part}")))?;
            params.insert(k.to_string(), v.to_string());
        }
        Ok(GenSpec {
            kind: kind.to_string(),
            params,
        })
    }
}

impl TryFrom<String> for GenSpec {
    type Error = SeqError;
    fn try_from(s: String) -> Result<Self, SeqError> {
        s.parse()
    }
}

impl From<GenSpec> for String {
    fn from(g: GenSpec) -> String {
        g.to_string()
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gen:{}", self.kind)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { '?' } else { '&' })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds() {
        let g: GenSpec = "gen:zeros".parse().unwrap();
        assert_eq!(g.build().unwrap().prefix(3).to_string(), "000");

        let g: GenSpec = "gen:champernowne?k=3".parse().unwrap();
        assert_eq!(g.build().unwrap().alphabet().size(), 3);

        let x: GenSpec = "gen:bsc?q=0&seed=4&side=x".parse().unwrap();
        let y: GenSpec = "gen:bsc?q=0&seed=4&side=y".parse().unwrap();
        assert_eq!(x.build().unwrap().prefix(100), y.build().unwrap().prefix(100));
    }

    #[test]
    fn display_round_trips() {
        let g: GenSpec = "gen:coupled?p=0.5,0,0,0.5&seed=3".parse().unwrap();
        assert_eq!(g.to_string().parse::<GenSpec>().unwrap(), g);
        assert_eq!(g.with_seed(9).param("seed"), Some("9"));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!("zeros".parse::<GenSpec>().is_err());
        assert!("gen:".parse::<GenSpec>().is_err());
        assert!("gen:zeros?k".parse::<GenSpec>().is_err());
        assert!("gen:nope".parse::<GenSpec>().unwrap().build().is_err());
        assert!("gen:zeros?k=1".parse::<GenSpec>().unwrap().build().is_err());
        assert!("gen:bsc?q=0.1&side=z".parse::<GenSpec>().unwrap().build().is_err());
    }
}
