//! Floating-point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A real scalar type the library can compute with.
///
/// Implemented for `f32` and `f64`. Randomness and configuration values are
/// produced in `f64` and narrowed through [`Scalar::of`].
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn of(v: f64) -> Self;

    /// Widens to `f64`.
    fn f64(self) -> f64;

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    /// Sign with the global tie rule `sign(0) = +1`.
    fn sign_pm(self) -> Self {
        if self >= Self::zero() {
            Self::one()
        } else {
            -Self::one()
        }
    }

    /// True when the value is exactly `+1` or `-1`.
    fn is_pm_one(self) -> bool {
        self == Self::one() || self == -Self::one()
    }
}

impl Scalar for f64 {
    #[inline]
    fn of(v: f64) -> Self {
        v
    }
    #[inline]
    fn f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn f64(self) -> f64 {
        self as f64
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm2_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

pub(crate) fn norm1<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc + x.abs())
}

/// Mean and standard error of the mean of a sample.
pub(crate) fn mean_stderr<T: Scalar>(values: &[T]) -> (T, T) {
    let n = values.len();
    if n == 0 {
        return (T::nan(), T::nan());
    }
    let nf = T::of_usize(n);
    let mean = values.iter().copied().sum::<T>() / nf;
    if n < 2 {
        return (mean, T::zero());
    }
    let ss = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    let var = ss / T::of_usize(n - 1);
    (mean, (var / nf).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_tie_rule() {
        assert_eq!(0.0f64.sign_pm(), 1.0);
        assert_eq!((-0.0f64).sign_pm(), 1.0);
        assert_eq!((-1e-300f64).sign_pm(), -1.0);
        assert_eq!(0.0f32.sign_pm(), 1.0);
    }

    #[test]
    fn constant_sample_has_zero_stderr() {
        let (m, s) = mean_stderr(&[1.0f64; 17]);
        assert_eq!(m, 1.0);
        assert_eq!(s, 0.0);
    }
}
