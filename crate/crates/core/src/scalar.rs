//! Scalar abstraction shared by every algorithm in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point element type the median algorithms operate on.
///
/// Implemented for `f32` and `f64`. Moments are always accumulated in `f64`
/// regardless of the element type, so `f32` data gets the same mean and
/// standard deviation accuracy as `f64` data.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn to_f64_lossless(self) -> f64;

    /// Nearest representable value of `x`.
    fn from_f64_nearest(x: f64) -> Self;

    /// `floor` of `self` clamped to `[0, max]`, NaN mapping to 0. `max` must
    /// be a whole number no larger than `2^24`.
    fn clamped_index(self, max: Self) -> u32;

    /// Key identifying a value for multiset bookkeeping. `-0.0` and `0.0`
    /// share a key since they compare equal.
    fn value_key(self) -> u64;
}

impl Scalar for f64 {
    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self
    }

    #[inline]
    fn from_f64_nearest(x: f64) -> Self {
        x
    }

    #[inline(always)]
    fn clamped_index(self, max: f64) -> u32 {
        let t = if self > 0.0 { self } else { 0.0 };
        let t = if t < max { t } else { max };
        // SAFETY: t is in [0, max] (NaN was replaced by 0), and max fits in
        // i32. The checked `as` conversion costs several times more in the
        // counting loop.
        unsafe { t.to_int_unchecked::<i32>() as u32 }
    }

    #[inline]
    fn value_key(self) -> u64 {
        if self == 0.0 {
            0
        } else {
            self.to_bits()
        }
    }
}

impl Scalar for f32 {
    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self as f64
    }

    #[inline]
    fn from_f64_nearest(x: f64) -> Self {
        x as f32
    }

    #[inline(always)]
    fn clamped_index(self, max: f32) -> u32 {
        let t = if self > 0.0 { self } else { 0.0 };
        let t = if t < max { t } else { max };
        // SAFETY: t is in [0, max] (NaN was replaced by 0), and max fits in
        // i32. The checked `as` conversion costs several times more in the
        // counting loop.
        unsafe { t.to_int_unchecked::<i32>() as u32 }
    }

    #[inline]
    fn value_key(self) -> u64 {
        if self == 0.0 {
            0
        } else {
            self.to_bits() as u64
        }
    }
}

/// Mean of two values, robust to overflow of their sum.
///
/// Every even-length median in the crate goes through this function, so
/// results from different algorithms are bitwise comparable.
#[inline]
pub fn mean_of_pair<T: Scalar>(a: T, b: T) -> T {
    let two = T::one() + T::one();
    let s = a + b;
    if s.is_finite() {
        s / two
    } else {
        a / two + b / two
    }
}
