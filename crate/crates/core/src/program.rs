//! Register-machine programs.
//!
//! Every instruction has the accumulator form `R[y] <- R[y] <op> operand`,
//! where the operand is `R[x]` in internal mode or
//! `external_factor * input[x]` in external mode. Division only ever divides
//! the target by the constant 2.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Hyperparameters;
use crate::scalar::{argmax, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operation {
    Add,
    Sub,
    Mul,
    /// Halves the target register; the operand is not read.
    Div2,
}

impl Operation {
    pub const ALL: [Operation; 4] = [Operation::Add, Operation::Sub, Operation::Mul, Operation::Div2];

    #[inline]
    pub fn apply<T: Scalar>(self, target: T, operand: T) -> T {
        match self {
            Operation::Add => target + operand,
            Operation::Sub => target - operand,
            Operation::Mul => target * operand,
            Operation::Div2 => target / T::of(2.0),
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Operation::Add => "+",
            Operation::Sub => "-",
            Operation::Mul => "*",
            Operation::Div2 => "/",
        }
    }
}

/// Where an instruction reads its operand from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Internal,
    External,
}

/// Register and input widths a program is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dimensions {
    pub n_actions: usize,
    pub n_extras: usize,
    pub n_inputs: usize,
}

impl Dimensions {
    pub fn new(n_actions: usize, n_extras: usize, n_inputs: usize) -> Self {
        Self {
            n_actions,
            n_extras,
            n_inputs,
        }
    }

    pub fn of(h: &Hyperparameters) -> Self {
        Self::new(h.n_actions, h.n_extras, h.n_inputs)
    }

    pub fn n_registers(&self) -> usize {
        self.n_actions + self.n_extras
    }

    /// Exclusive upper bound of a source index in `mode`.
    pub fn source_bound(&self, mode: Mode) -> usize {
        match mode {
            Mode::Internal => self.n_registers(),
            Mode::External => self.n_inputs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instruction {
    pub target: usize,
    pub source: usize,
    pub op: Operation,
    pub mode: Mode,
}

impl Instruction {
    pub fn new(target: usize, source: usize, op: Operation, mode: Mode) -> Self {
        Self {
            target,
            source,
            op,
            mode,
        }
    }

    pub fn is_valid_for(&self, dims: &Dimensions) -> bool {
        self.target < dims.n_registers() && self.source < dims.source_bound(self.mode)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let y = self.target;
        match (self.op, self.mode) {
            (Operation::Div2, _) => write!(f, "R[{y}] <- R[{y}] / 2"),
            (op, Mode::Internal) => write!(f, "R[{y}] <- R[{y}] {} R[{}]", op.symbol(), self.source),
            (op, Mode::External) => write!(f, "R[{y}] <- R[{y}] {} R[${}]", op.symbol(), self.source),
        }
    }
}

/// The register file. The first `n_actions` entries are action registers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterSet<T> {
    values: Vec<T>,
}

impl<T: Scalar> RegisterSet<T> {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![T::zero(); len],
        }
    }

    pub fn from_values(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn reset(&mut self) {
        self.values.iter_mut().for_each(|v| *v = T::zero());
    }

    /// Argmax over the action-register prefix, lowest index on ties.
    pub fn best_action(&self, n_actions: usize) -> usize {
        best_action(self.values(), n_actions)
    }

    /// Argmax over the whole register file, lowest index on ties.
    pub fn winning_register(&self) -> usize {
        argmax(&self.values).unwrap_or(0)
    }
}

/// Index of the largest of the first `n_actions` registers, lowest index on
/// ties.
///
/// # Panics
///
/// If `n_actions` is zero or exceeds the register count.
pub fn best_action<T: Scalar>(registers: &[T], n_actions: usize) -> usize {
    assert!(
        n_actions >= 1 && n_actions <= registers.len(),
        "n_actions {n_actions} outside register file of {}",
        registers.len()
    );
    argmax(&registers[..n_actions]).expect("non-empty prefix")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("program has no instructions")]
    Empty,
    #[error("program has {len} instructions, limit is {max}")]
    TooLong { len: usize, max: usize },
    #[error("instruction {position} ({instruction}) is out of bounds")]
    OutOfBounds { position: usize, instruction: Instruction },
    #[error("register file has {actual} registers, expected {expected}")]
    RegisterCount { actual: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program<T> {
    pub instructions: Vec<Instruction>,
    pub registers: RegisterSet<T>,
    pub dims: Dimensions,
}

impl<T: Scalar> Program<T> {
    /// Builds a program after checking every instruction against `dims`.
    pub fn new(instructions: Vec<Instruction>, dims: Dimensions) -> Result<Self, ProgramError> {
        let program = Self {
            instructions,
            registers: RegisterSet::zeros(dims.n_registers()),
            dims,
        };
        program.check(usize::MAX)?;
        Ok(program)
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Verifies length bounds, index bounds and register-file width.
    pub fn check(&self, max_instructions: usize) -> Result<(), ProgramError> {
        if self.instructions.is_empty() {
            return Err(ProgramError::Empty);
        }
        if self.instructions.len() > max_instructions {
            return Err(ProgramError::TooLong {
                len: self.instructions.len(),
                max: max_instructions,
            });
        }
        if self.registers.len() != self.dims.n_registers() {
            return Err(ProgramError::RegisterCount {
                actual: self.registers.len(),
                expected: self.dims.n_registers(),
            });
        }
        for (position, instruction) in self.instructions.iter().enumerate() {
            if !instruction.is_valid_for(&self.dims) {
                return Err(ProgramError::OutOfBounds {
                    position,
                    instruction: *instruction,
                });
            }
        }
        Ok(())
    }

    /// Runs the program on `input` from a zeroed register file.
    ///
    /// Any non-finite intermediate value is replaced by zero, so the returned
    /// registers are always finite.
    ///
    /// # Panics
    ///
    /// If an external source index is outside `input`. Construction through
    /// [`Program::new`] or the variation operators rules this out when the
    /// input width matches `dims.n_inputs`.
    pub fn execute(&mut self, input: &[T], external_factor: T) -> &RegisterSet<T> {
        self.registers.reset();
        let registers = &mut self.registers.values;
        for instruction in &self.instructions {
            let operand = match instruction.mode {
                Mode::Internal => registers[instruction.source],
                Mode::External => (external_factor * input[instruction.source]).finite_or_zero(),
            };
            let target = &mut registers[instruction.target];
            *target = instruction.op.apply(*target, operand).finite_or_zero();
        }
        &self.registers
    }
}

impl<T> fmt::Display for Program<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for instruction in &self.instructions {
            writeln!(f, "{instruction}")?;
        }
        Ok(())
    }
}
