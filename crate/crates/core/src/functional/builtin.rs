//! Named fixtures: `identity`, `xor-mask:<mask>`, `dilute:<d>`,
//! `condense:<d>`, plus `const:<symbol>` and `copy-program`.

use crate::seq::{Alphabet, Str, Symbol};

use super::program::{Instr, Program};
use super::transducer::Transducer;
use super::{Body, FunctionalError, TuringFunctional};

pub const BUILTIN_NAMES: &[&str] = &[
    "identity",
    "xor-mask:<mask>",
    "dilute:<d>",
    "condense:<d>",
    "const:<symbol>",
    "copy-program",
];

pub fn builtin(name: &str, alphabet: Alphabet) -> Result<TuringFunctional, FunctionalError> {
    let unknown = || FunctionalError::UnknownBuiltin(name.to_string());
    let (base, arg) = match name.split_once(':') {
        Some((b, a)) => (b, Some(a)),
        None => (name, None),
    };
    let count = |a: Option<&str>| -> Result<usize, FunctionalError> {
        a.and_then(|v| v.parse().ok()).ok_or_else(unknown)
    };
    let body = match (base, arg) {
        ("identity", None) => Body::Transducer(identity(alphabet)),
        ("xor-mask", Some(mask)) => {
            let mask = Str::parse(mask, alphabet).map_err(|_| unknown())?;
            Body::Transducer(xor_mask(alphabet, mask.symbols())?)
        }
        ("dilute", a) => Body::Transducer(dilute(alphabet, count(a)?)),
        ("condense", a) => Body::Transducer(condense(alphabet, count(a)?)),
        ("const", a) => {
            let sym = count(a)?;
            if sym >= alphabet.size() {
                return Err(unknown());
            }
            Body::Program(constant(alphabet, sym as Symbol))
        }
        ("copy-program", None) => Body::Program(copy_program(alphabet)),
        _ => return Err(unknown()),
    };
    Ok(TuringFunctional::new(name.to_string(), body))
}

fn single_state(alphabet: Alphabet, f: impl Fn(Symbol) -> Vec<Symbol>) -> Transducer {
    let row = (0..alphabet.size()).map(|a| (0, f(a as Symbol))).collect();
    Transducer::new(alphabet, vec!["s".into()], 0, vec![row]).expect("well-formed fixture")
}

pub fn identity(alphabet: Alphabet) -> Transducer {
    single_state(alphabet, |a| vec![a])
}

/// `a_i -> (a_i + m_{i mod |m|}) mod k`; for `k = 2` this is xor.
pub fn xor_mask(alphabet: Alphabet, mask: &[Symbol]) -> Result<Transducer, FunctionalError> {
    if mask.is_empty() {
        return Err(FunctionalError::UnknownBuiltin("xor-mask with empty mask".into()));
    }
    let k = alphabet.size();
    let states = (0..mask.len()).map(|i| format!("m{i}")).collect();
    let rows = mask
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            (0..k)
                .map(|a| ((i + 1) % mask.len(), vec![((a + m as usize) % k) as Symbol]))
                .collect()
        })
        .collect();
    Transducer::new(alphabet, states, 0, rows)
}

/// `a -> a 0^d`.
pub fn dilute(alphabet: Alphabet, d: usize) -> Transducer {
    single_state(alphabet, |a| {
        let mut out = vec![0; d + 1];
        out[0] = a;
        out
    })
}

/// Reads blocks of `d + 1` symbols and emits the first symbol of each block
/// once the block is complete.
pub fn condense(alphabet: Alphabet, d: usize) -> Transducer {
    if d == 0 {
        return identity(alphabet);
    }
    let k = alphabet.size();
    // State 0 is a block boundary; state 1 + (j - 1) * k + a means j symbols
    // of the current block have been read and the first was a.
    let index = |j: usize, a: usize| 1 + (j - 1) * k + a;
    let mut states = vec!["b".to_string()];
    let mut rows = vec![(0..k).map(|a| (index(1, a), vec![])).collect::<Vec<_>>()];
    for j in 1..=d {
        for first in 0..k {
            states.push(format!("p{j}_{first}"));
            let row = (0..k)
                .map(|_| {
                    if j == d {
                        (0, vec![first as Symbol])
                    } else {
                        (index(j + 1, first), vec![])
                    }
                })
                .collect();
            rows.push(row);
        }
    }
    Transducer::new(alphabet, states, 0, rows).expect("well-formed fixture")
}

/// Emits `sym` forever without querying.
pub fn constant(alphabet: Alphabet, sym: Symbol) -> Program {
    Program::new(
        alphabet,
        vec![Instr::Set(1, sym as u64), Instr::Emit(1), Instr::Jmp(1)],
    )
    .expect("well-formed fixture")
}

/// The identity functional as a register program.
pub fn copy_program(alphabet: Alphabet) -> Program {
    Program::new(
        alphabet,
        vec![
            Instr::Query(2, 1),
            Instr::Emit(2),
            Instr::AddI(1, 1),
            Instr::Jmp(0),
        ],
    )
    .expect("well-formed fixture")
}
