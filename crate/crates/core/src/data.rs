//! Validated input buffers and median rank targets.

use std::ops::{Deref, DerefMut};

use crate::error::{MedianError, Result};
use crate::scalar::Scalar;

/// Non-empty buffer of finite values.
///
/// NaN and infinities are rejected at construction; every algorithm in the
/// crate assumes finite input.
#[derive(Debug, Clone, PartialEq)]
pub struct DataBuffer<T> {
    values: Vec<T>,
}

impl<T: Scalar> DataBuffer<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(MedianError::Empty);
        }
        check_finite(&values)?;
        Ok(Self { values })
    }

    pub fn from_slice(values: &[T]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn into_inner(self) -> Vec<T> {
        self.values
    }
}

impl<T> Deref for DataBuffer<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.values
    }
}

impl<T> DerefMut for DataBuffer<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.values
    }
}

/// Rejects NaN and infinities, reporting the first offending index.
pub fn check_finite<T: Scalar>(values: &[T]) -> Result<()> {
    match values.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(MedianError::NonFinite {
            index,
            value: values[index].to_f64_lossless(),
        }),
        None => Ok(()),
    }
}

/// The rank or ranks (1-based) whose values define the median.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedianTarget {
    /// Odd `n`: `k = (n + 1) / 2`.
    Single(usize),
    /// Even `n`: the left and right middle ranks `n/2` and `n/2 + 1`.
    Pair(usize, usize),
}

impl MedianTarget {
    pub fn for_len(n: usize) -> Result<Self> {
        match n {
            0 => Err(MedianError::Empty),
            n if n % 2 == 1 => Ok(MedianTarget::Single((n + 1) / 2)),
            n => Ok(MedianTarget::Pair(n / 2, n / 2 + 1)),
        }
    }

    /// `(low, high)` ranks; equal for `Single`.
    pub fn ranks(self) -> (usize, usize) {
        match self {
            MedianTarget::Single(k) => (k, k),
            MedianTarget::Pair(lo, hi) => (lo, hi),
        }
    }

    pub fn is_valid_for(self, n: usize) -> bool {
        match self {
            MedianTarget::Single(k) => k >= 1 && k <= n,
            MedianTarget::Pair(lo, hi) => hi == lo + 1 && lo >= 1 && lo < n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_and_infinity() {
        assert!(matches!(
            DataBuffer::new(vec![1.0, f64::NAN]),
            Err(MedianError::NonFinite { index: 1, .. })
        ));
        assert!(matches!(
            DataBuffer::new(vec![f64::NEG_INFINITY]),
            Err(MedianError::NonFinite { index: 0, .. })
        ));
        assert_eq!(DataBuffer::<f64>::new(vec![]), Err(MedianError::Empty));
    }

    #[test]
    fn targets_follow_parity() {
        assert_eq!(MedianTarget::for_len(1).unwrap(), MedianTarget::Single(1));
        assert_eq!(MedianTarget::for_len(5).unwrap(), MedianTarget::Single(3));
        assert_eq!(MedianTarget::for_len(4).unwrap(), MedianTarget::Pair(2, 3));
        assert!(MedianTarget::for_len(0).is_err());
        assert!(MedianTarget::Pair(2, 3).is_valid_for(4));
        assert!(!MedianTarget::Pair(4, 5).is_valid_for(4));
        assert!(!MedianTarget::Single(0).is_valid_for(4));
    }
}
