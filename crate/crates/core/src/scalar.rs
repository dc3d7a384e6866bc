//! Scalar abstraction for register values, physics state and Q-values.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the register machine, simulators and Q-table are
/// generic over. Implemented for `f32` and `f64`.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal. Every `f64` is representable (possibly
    /// rounded) in both implementors, so this never fails.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// Replaces NaN and infinities with zero.
    #[inline]
    fn finite_or_zero(self) -> Self {
        if self.is_finite() {
            self
        } else {
            Self::zero()
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Index of the largest value, lowest index on ties. `None` on empty input.
///
/// NaN never wins a comparison, so a slice containing NaN still yields the
/// maximum of the remaining values.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v > b => best = Some((i, v)),
            _ => {}
        }
    }
    best.map(|(i, _)| i)
}
