//! Plain-text functional definitions.
//!
//! ```text
//! # dilution: a -> a0
//! transducer dilute1
//! alphabet 2
//! start s
//! s, 0 -> s, 00
//! s, 1 -> s, 10
//! end
//!
//! program copy
//! alphabet 2
//! loop:
//!   jlt r1 r0 body
//!   halt
//! body:
//!   query r2 r1
//!   emit r2
//!   addi r1 1
//!   jmp loop
//! end
//! ```
//!
//! Transducer outputs are digit strings for `k <= 10`, whitespace-separated
//! integers otherwise, and `-` for the empty string. `start` defaults to the
//! first state mentioned.

use std::collections::HashMap;

use crate::seq::{Alphabet, Symbol};

use super::program::{Instr, Program, Reg};
use super::transducer::Transducer;
use super::{Body, FunctionalError, TuringFunctional};

pub fn parse_functionals(text: &str) -> Result<Vec<TuringFunctional>, FunctionalError> {
    let mut out = Vec::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    while let Some((lineno, header)) = lines.next() {
        let mut words = header.split_whitespace();
        let kind = words.next().unwrap_or("");
        let name = words
            .next()
            .ok_or_else(|| perr(lineno, "block header needs a name"))?
            .to_string();
        if !matches!(kind, "transducer" | "program") {
            return Err(perr(lineno, format!("expected `transducer` or `program`, got `{kind}`")));
        }
        let mut body = Vec::new();
        let mut closed = false;
        for (n, l) in lines.by_ref() {
            if l == "end" {
                closed = true;
                break;
            }
            body.push((n, l));
        }
        if !closed {
            return Err(perr(lineno, format!("block `{name}` is missing `end`")));
        }
        let (alphabet, body) = take_alphabet(&body)?;
        let body = match kind {
            "transducer" => Body::Transducer(parse_transducer(alphabet, &body)?),
            _ => Body::Program(parse_program(alphabet, &body)?),
        };
        out.push(TuringFunctional::new(name, body));
    }
    Ok(out)
}

/// Exactly one block.
pub fn parse_functional(text: &str) -> Result<TuringFunctional, FunctionalError> {
    let mut all = parse_functionals(text)?;
    match all.len() {
        1 => Ok(all.pop().expect("length checked")),
        n => Err(FunctionalError::Parse(format!("expected one functional, found {n}"))),
    }
}

fn perr(line: usize, msg: impl std::fmt::Display) -> FunctionalError {
    FunctionalError::Parse(format!("line {line}: {msg}"))
}

type Lines<'a> = Vec<(usize, &'a str)>;

fn take_alphabet<'a>(body: &Lines<'a>) -> Result<(Alphabet, Lines<'a>), FunctionalError> {
    let mut alphabet = Alphabet::BINARY;
    let mut rest = Vec::new();
    for &(n, l) in body {
        if let Some(v) = l.strip_prefix("alphabet ") {
            let k: usize = v.trim().parse().map_err(|_| perr(n, "bad alphabet size"))?;
            alphabet = Alphabet::new(k).map_err(|e| perr(n, e))?;
        } else {
            rest.push((n, l));
        }
    }
    Ok((alphabet, rest))
}

/// Target state and output of one transition.
type Edge = (usize, Vec<Symbol>);

fn parse_transducer(alphabet: Alphabet, body: &Lines) -> Result<Transducer, FunctionalError> {
    let k = alphabet.size();
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut intern = |s: &str, names: &mut Vec<String>| -> usize {
        *index.entry(s.to_string()).or_insert_with(|| {
            names.push(s.to_string());
            names.len() - 1
        })
    };
    let mut start_name = None;
    let mut edges = Vec::new();
    for &(n, l) in body {
        if let Some(s) = l.strip_prefix("start ") {
            start_name = Some((n, s.trim().to_string()));
            continue;
        }
        let (lhs, rhs) = l
            .split_once("->")
            .ok_or_else(|| perr(n, "expected `state, in -> state', out`"))?;
        let (from, input) = lhs
            .split_once(',')
            .ok_or_else(|| perr(n, "expected `state, in` before `->`"))?;
        let (to, output) = rhs
            .split_once(',')
            .ok_or_else(|| perr(n, "expected `state', out` after `->`"))?;
        let input: usize = input.trim().parse().map_err(|_| perr(n, "bad input symbol"))?;
        if input >= k {
            return Err(perr(n, format!("input symbol {input} outside alphabet")));
        }
        let output = parse_output(output.trim(), k).ok_or_else(|| perr(n, "bad output string"))?;
        let from = intern(from.trim(), &mut names);
        let to = intern(to.trim(), &mut names);
        edges.push((n, from, input, to, output));
    }
    if names.is_empty() {
        return Err(FunctionalError::InvalidTransducer("no transitions".into()));
    }
    let start = match start_name {
        None => 0,
        Some((n, s)) => names
            .iter()
            .position(|x| *x == s)
            .ok_or_else(|| perr(n, format!("unknown start state {s}")))?,
    };
    let mut rows: Vec<Vec<Option<Edge>>> = vec![vec![None; k]; names.len()];
    for (n, from, input, to, output) in edges {
        if rows[from][input].replace((to, output)).is_some() {
            return Err(perr(n, format!("duplicate transition for ({}, {input})", names[from])));
        }
    }
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(q, row)| {
            row.into_iter()
                .enumerate()
                .map(|(a, t)| {
                    t.ok_or_else(|| {
                        FunctionalError::InvalidTransducer(format!(
                            "missing transition for ({}, {a})",
                            names[q]
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Transducer::new(alphabet, names, start, rows)
}

fn parse_output(s: &str, k: usize) -> Option<Vec<Symbol>> {
    if s == "-" {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    for tok in s.split_whitespace() {
        if k <= 10 {
            for c in tok.chars() {
                out.push(c.to_digit(10).filter(|&d| (d as usize) < k)? as Symbol);
            }
        } else {
            let v: usize = tok.parse().ok()?;
            if v >= k {
                return None;
            }
            out.push(v as Symbol);
        }
    }
    Some(out)
}

fn parse_program(alphabet: Alphabet, body: &Lines) -> Result<Program, FunctionalError> {
    let mut labels = HashMap::new();
    let mut stmts = Vec::new();
    for &(n, l) in body {
        if let Some(label) = l.strip_suffix(':') {
            if labels.insert(label.trim().to_string(), stmts.len()).is_some() {
                return Err(perr(n, format!("duplicate label {label}")));
            }
        } else {
            stmts.push((n, l));
        }
    }
    let mut code = Vec::with_capacity(stmts.len());
    for (n, l) in stmts {
        let toks: Vec<&str> = l
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        let reg = |i: usize| -> Result<Reg, FunctionalError> {
            toks.get(i)
                .and_then(|t| t.strip_prefix('r'))
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| perr(n, format!("operand {i} of `{l}` is not a register")))
        };
        let imm = |i: usize| -> Result<u64, FunctionalError> {
            toks.get(i)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| perr(n, format!("operand {i} of `{l}` is not an integer")))
        };
        let label = |i: usize| -> Result<usize, FunctionalError> {
            toks.get(i)
                .and_then(|t| labels.get(*t).copied())
                .ok_or_else(|| perr(n, format!("unknown label in `{l}`")))
        };
        let arity = match toks[0] {
            "halt" => 0,
            "emit" | "jmp" => 1,
            "jlt" => 3,
            _ => 2,
        };
        if toks.len() != arity + 1 {
            return Err(perr(n, format!("`{}` takes {arity} operands", toks[0])));
        }
        let ins = match toks[0] {
            "set" => Instr::Set(reg(1)?, imm(2)?),
            "mov" => Instr::Mov(reg(1)?, reg(2)?),
            "add" => Instr::Add(reg(1)?, reg(2)?),
            "sub" => Instr::Sub(reg(1)?, reg(2)?),
            "addi" => Instr::AddI(reg(1)?, imm(2)?),
            "mul" => Instr::Mul(reg(1)?, reg(2)?),
            "div" => Instr::Div(reg(1)?, reg(2)?),
            "mod" => Instr::Mod(reg(1)?, reg(2)?),
            "query" => Instr::Query(reg(1)?, reg(2)?),
            "emit" => Instr::Emit(reg(1)?),
            "jmp" => Instr::Jmp(label(1)?),
            "jz" => Instr::Jz(reg(1)?, label(2)?),
            "jnz" => Instr::Jnz(reg(1)?, label(2)?),
            "jlt" => Instr::Jlt(reg(1)?, reg(2)?, label(3)?),
            "halt" => Instr::Halt,
            other => return Err(perr(n, format!("unknown mnemonic `{other}`"))),
        };
        code.push(ins);
    }
    Program::new(alphabet, code)
}
