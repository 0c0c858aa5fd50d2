//! Sequence files: a header line `alphabet=k`, then symbol text.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{Alphabet, SeqError, Str};

pub fn write_sequence<W: Write>(mut w: W, s: &Str) -> Result<(), SeqError> {
    writeln!(w, "alphabet={}", s.alphabet().size())?;
    writeln!(w, "{s}")?;
    Ok(())
}

pub fn read_sequence<R: Read>(mut r: R) -> Result<Str, SeqError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let (header, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
    let k = header
        .trim()
        .strip_prefix("alphabet=")
        .ok_or_else(|| SeqError::Parse("missing `alphabet=k` header".into()))?
        .trim()
        .parse::<usize>()
        .map_err(|e| SeqError::Parse(format!("bad alphabet size: {e}")))?;
    Str::parse(body, Alphabet::new(k)?)
}

pub fn write_sequence_file(path: impl AsRef<Path>, s: &Str) -> Result<(), SeqError> {
    let f = fs::File::create(path)?;
    write_sequence(std::io::BufWriter::new(f), s)
}

pub fn read_sequence_file(path: impl AsRef<Path>) -> Result<Str, SeqError> {
    read_sequence(fs::File::open(path)?)
}
