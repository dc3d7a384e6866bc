//! Program generation, two-point crossover and instruction-replacement
//! mutation. Operators never modify their inputs.

use rand::Rng;

use crate::config::Hyperparameters;
use crate::program::{Dimensions, Instruction, Mode, Operation, Program, RegisterSet};
use crate::scalar::Scalar;

/// A uniformly random instruction valid for `dims`.
pub fn random_instruction<R: Rng + ?Sized>(dims: &Dimensions, rng: &mut R) -> Instruction {
    let op = Operation::ALL[rng.random_range(0..Operation::ALL.len())];
    let mode = if rng.random_bool(0.5) {
        Mode::External
    } else {
        Mode::Internal
    };
    let target = rng.random_range(0..dims.n_registers());
    let source = rng.random_range(0..dims.source_bound(mode));
    Instruction::new(target, source, op, mode)
}

pub fn generate_instruction<R: Rng + ?Sized>(h: &Hyperparameters, rng: &mut R) -> Instruction {
    random_instruction(&Dimensions::of(h), rng)
}

/// A program of uniformly random length in `[1, max_instructions]` with a
/// zeroed register file.
pub fn generate_program<T: Scalar, R: Rng + ?Sized>(h: &Hyperparameters, rng: &mut R) -> Program<T> {
    let dims = Dimensions::of(h);
    let len = rng.random_range(1..=h.max_instructions.max(1));
    let instructions = (0..len).map(|_| random_instruction(&dims, rng)).collect();
    Program {
        instructions,
        registers: RegisterSet::zeros(dims.n_registers()),
        dims,
    }
}

/// Swaps `[start, end)` between clones of the parents and returns the first
/// clone when `keep_first`, the second otherwise.
///
/// # Panics
///
/// If `start > end` or `end` exceeds either parent's length.
pub fn crossover_at<T: Scalar>(
    first: &Program<T>,
    second: &Program<T>,
    start: usize,
    end: usize,
    keep_first: bool,
) -> Program<T> {
    let (mut a, mut b) = (first.clone(), second.clone());
    a.instructions[start..end].swap_with_slice(&mut b.instructions[start..end]);
    if keep_first {
        a
    } else {
        b
    }
}

/// Two-point crossover. Cut points `a <= b` are drawn in
/// `[0, min(len1, len2)]` so the same index range exists in both parents;
/// one of the two offspring is returned at random.
pub fn crossover<T: Scalar, R: Rng + ?Sized>(first: &Program<T>, second: &Program<T>, rng: &mut R) -> Program<T> {
    let limit = first.len().min(second.len());
    let x = rng.random_range(0..=limit);
    let y = rng.random_range(0..=limit);
    let (start, end) = if x <= y { (x, y) } else { (y, x) };
    let keep_first = rng.random_bool(0.5);
    crossover_at(first, second, start, end, keep_first)
}

/// Which properties of the selected instruction get replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReplaceMask {
    pub operation: bool,
    /// Source index together with its mode.
    pub source: bool,
    pub target: bool,
}

impl ReplaceMask {
    pub const ALL: ReplaceMask = ReplaceMask {
        operation: true,
        source: true,
        target: true,
    };
    pub const NONE: ReplaceMask = ReplaceMask {
        operation: false,
        source: false,
        target: false,
    };
}

/// Copies the masked properties of `fresh` into instruction `position` of a
/// clone of `program`.
pub fn mutate_at<T: Scalar>(
    program: &Program<T>,
    position: usize,
    fresh: Instruction,
    mask: ReplaceMask,
) -> Program<T> {
    let mut child = program.clone();
    let instruction = &mut child.instructions[position];
    if mask.operation {
        instruction.op = fresh.op;
    }
    if mask.source {
        instruction.source = fresh.source;
        instruction.mode = fresh.mode;
    }
    if mask.target {
        instruction.target = fresh.target;
    }
    child
}

/// Instruction-replacement mutation: picks one position uniformly, draws a
/// fresh instruction, and copies each of operation, source and target from it
/// with probability 0.5.
pub fn mutate<T: Scalar, R: Rng + ?Sized>(program: &Program<T>, rng: &mut R) -> Program<T> {
    let position = rng.random_range(0..program.len());
    let fresh = random_instruction(&program.dims, rng);
    let mask = ReplaceMask {
        operation: rng.random::<f64>() < 0.5,
        source: rng.random::<f64>() < 0.5,
        target: rng.random::<f64>() < 0.5,
    };
    mutate_at(program, position, fresh, mask)
}
