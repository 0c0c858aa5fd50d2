//! A small register machine with an explicit oracle `query` instruction.

use crate::seq::{Alphabet, Symbol};

use super::FunctionalError;

pub const NUM_REGISTERS: usize = 8;

pub type Reg = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instr {
    Set(Reg, u64),
    Mov(Reg, Reg),
    Add(Reg, Reg),
    /// Saturating at 0.
    Sub(Reg, Reg),
    AddI(Reg, u64),
    Mul(Reg, Reg),
    /// Division by zero yields 0.
    Div(Reg, Reg),
    Mod(Reg, Reg),
    /// `dst = oracle[reg]`
    Query(Reg, Reg),
    Emit(Reg),
    Jmp(usize),
    Jz(Reg, usize),
    Jnz(Reg, usize),
    /// Jump if `a < b`.
    Jlt(Reg, Reg, usize),
    Halt,
}

/// Bytecode plus the alphabet it emits over. Register `r0` starts at `n`,
/// the rest at 0. The run halts as soon as `n` symbols have been emitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    alphabet: Alphabet,
    code: Vec<Instr>,
}

/// Something the program can query. `Err` ends the run as a divergence.
pub trait QuerySource {
    fn query(&mut self, i: u64) -> Result<Symbol, super::DivergeReason>;
}

pub(crate) enum ProgramEnd {
    Halted(Vec<Symbol>),
    Diverged(super::DivergeReason),
}

pub(crate) struct ProgramRun {
    pub end: ProgramEnd,
    pub largest_query: Option<u64>,
    pub steps: u64,
}

impl Program {
    pub fn new(alphabet: Alphabet, code: Vec<Instr>) -> Result<Self, FunctionalError> {
        for (pc, ins) in code.iter().enumerate() {
            let regs: Vec<Reg> = match *ins {
                Instr::Set(r, _)
                | Instr::AddI(r, _)
                | Instr::Emit(r)
                | Instr::Jz(r, _)
                | Instr::Jnz(r, _) => vec![r],
                Instr::Mov(a, b)
                | Instr::Add(a, b)
                | Instr::Sub(a, b)
                | Instr::Mul(a, b)
                | Instr::Div(a, b)
                | Instr::Mod(a, b)
                | Instr::Query(a, b)
                | Instr::Jlt(a, b, _) => vec![a, b],
                Instr::Jmp(_) | Instr::Halt => vec![],
            };
            if let Some(r) = regs.iter().find(|&&r| r as usize >= NUM_REGISTERS) {
                return Err(FunctionalError::InvalidProgram(format!("register r{r} at pc {pc}")));
            }
            let target = match ins {
                Instr::Jmp(t) | Instr::Jz(_, t) | Instr::Jnz(_, t) | Instr::Jlt(_, _, t) => Some(*t),
                _ => None,
            };
            if let Some(t) = target.filter(|&t| t > code.len()) {
                return Err(FunctionalError::InvalidProgram(format!("jump to {t} at pc {pc}")));
            }
        }
        Ok(Program { alphabet, code })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn code(&self) -> &[Instr] {
        &self.code
    }

    pub(crate) fn execute(
        &self,
        oracle: &mut dyn QuerySource,
        n: usize,
        budget: u64,
    ) -> Result<ProgramRun, FunctionalError> {
        let mut regs = [0u64; NUM_REGISTERS];
        regs[0] = n as u64;
        let mut out = Vec::with_capacity(n);
        let mut largest: Option<u64> = None;
        let mut steps = 0u64;
        let mut pc = 0usize;
        let finish = |end, largest_query, steps| {
            Ok(ProgramRun {
                end,
                largest_query,
                steps,
            })
        };
        if n == 0 {
            return finish(ProgramEnd::Halted(out), None, 0);
        }
        loop {
            if pc >= self.code.len() {
                break;
            }
            if steps >= budget {
                return finish(
                    ProgramEnd::Diverged(super::DivergeReason::BudgetExhausted),
                    largest,
                    steps,
                );
            }
            steps += 1;
            let r = |x: Reg| x as usize;
            let mut next = pc + 1;
            match self.code[pc] {
                Instr::Set(d, v) => regs[r(d)] = v,
                Instr::Mov(d, s) => regs[r(d)] = regs[r(s)],
                Instr::Add(d, s) => regs[r(d)] = regs[r(d)].wrapping_add(regs[r(s)]),
                Instr::Sub(d, s) => regs[r(d)] = regs[r(d)].saturating_sub(regs[r(s)]),
                Instr::AddI(d, v) => regs[r(d)] = regs[r(d)].wrapping_add(v),
                Instr::Mul(d, s) => regs[r(d)] = regs[r(d)].wrapping_mul(regs[r(s)]),
                Instr::Div(d, s) => regs[r(d)] = regs[r(d)].checked_div(regs[r(s)]).unwrap_or(0),
                Instr::Mod(d, s) => regs[r(d)] = regs[r(d)].checked_rem(regs[r(s)]).unwrap_or(0),
                Instr::Query(d, i) => {
                    let pos = regs[r(i)];
                    largest = Some(largest.map_or(pos, |l| l.max(pos)));
                    match oracle.query(pos) {
                        Ok(sym) => regs[r(d)] = sym as u64,
                        Err(reason) => return finish(ProgramEnd::Diverged(reason), largest, steps),
                    }
                }
                Instr::Emit(s) => {
                    let v = regs[r(s)];
                    if v >= self.alphabet.size() as u64 {
                        return Err(FunctionalError::BadEmit { value: v, pc });
                    }
                    out.push(v as Symbol);
                    if out.len() == n {
                        return finish(ProgramEnd::Halted(out), largest, steps);
                    }
                }
                Instr::Jmp(t) => next = t,
                Instr::Jz(c, t) => {
                    if regs[r(c)] == 0 {
                        next = t
                    }
                }
                Instr::Jnz(c, t) => {
                    if regs[r(c)] != 0 {
                        next = t
                    }
                }
                Instr::Jlt(a, b, t) => {
                    if regs[r(a)] < regs[r(b)] {
                        next = t
                    }
                }
                Instr::Halt => break,
            }
            pc = next;
        }
        Err(FunctionalError::ShortOutput {
            wanted: n,
            got: out.len(),
        })
    }
}
