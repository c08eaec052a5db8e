//! Scalar abstraction for the numeric core.
//!
//! Everything downstream (quadrature, statistics, scanning) is written
//! against [`Real`] so the same code runs in `f32` or `f64`. The crate
//! root exports `f64`-concrete aliases for the common types.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the numeric core is generic over.
///
/// In practice this is `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into `Self`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant converts to any Real")
    }

    /// Converts a count into `Self`.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to any Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Compensated (Kahan–Neumaier) summation.
///
/// The characteristic-function quadrature cancels ten-plus orders of
/// magnitude in the distribution tails; plain sequential summation
/// noise would dominate the result there.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    pub fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.compensation
    }

    /// Rounded total plus the exact residual (Fast2Sum split), for
    /// callers that need the value to better than one rounding.
    pub fn split(&self) -> (T, T) {
        let hi = self.sum + self.compensation;
        let lo = self.compensation - (hi - self.sum);
        (hi, lo)
    }
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        // 1 + 1e-16 added 10^4 times loses the small term entirely in
        // naive f64 summation once the running sum is large.
        let mut cs = CompensatedSum::<f64>::new();
        cs.add(1.0);
        for _ in 0..10_000 {
            cs.add(1e-16);
        }
        assert!((cs.total() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn real_of_converts() {
        let x: f32 = Real::of(0.25);
        assert_eq!(x, 0.25f32);
        let y: f64 = Real::of_usize(7);
        assert_eq!(y, 7.0);
    }
}
