use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Count, sum and sum of squares of a dataset.
///
/// Accumulated in `f64` whatever the element type. Merging is field-wise
/// addition, so partial moments from disjoint pieces combine into the moments
/// of the union (up to floating-point reassociation of the sums).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub const ZERO: Moments = Moments {
        count: 0,
        sum: 0.0,
        sum_sq: 0.0,
    };

    pub fn of<T: Scalar>(values: &[T]) -> Self {
        let mut m = Moments::ZERO;
        m.extend(values);
        m
    }

    #[inline]
    pub fn push<T: Scalar>(&mut self, x: T) {
        let x = x.to_f64_lossless();
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn extend<T: Scalar>(&mut self, values: &[T]) {
        let (mut sum, mut sum_sq) = ([0.0f64; 4], [0.0f64; 4]);
        let mut chunks = values.chunks_exact(4);
        for c in &mut chunks {
            for j in 0..4 {
                let x = c[j].to_f64_lossless();
                sum[j] += x;
                sum_sq[j] += x * x;
            }
        }
        for (j, &x) in chunks.remainder().iter().enumerate() {
            let x = x.to_f64_lossless();
            sum[j] += x;
            sum_sq[j] += x * x;
        }
        self.count += values.len() as u64;
        self.sum += (sum[0] + sum[1]) + (sum[2] + sum[3]);
        self.sum_sq += (sum_sq[0] + sum_sq[1]) + (sum_sq[2] + sum_sq[3]);
    }

    pub fn merge(self, other: Moments) -> Moments {
        Moments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Mean, or 0 for an empty set.
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Population variance. Values within the rounding error of the sums are
    /// reported as zero; infinite when the sums overflowed.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean_sq = self.sum_sq / n;
        let mean = self.sum / n;
        let v = mean_sq - mean * mean;
        if v.is_nan() {
            f64::INFINITY
        } else if v <= (n + 2.0) * f64::EPSILON * mean_sq {
            0.0
        } else {
            v
        }
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Smallest and largest value of a non-empty set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent<T> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> Extent<T> {
    pub fn of(values: &[T]) -> Option<Self> {
        let first = *values.first()?;
        let mut e = Extent { min: first, max: first };
        for &x in &values[1..] {
            e.include(x);
        }
        Some(e)
    }

    #[inline]
    pub fn include(&mut self, x: T) {
        if x < self.min {
            self.min = x;
        }
        if x > self.max {
            self.max = x;
        }
    }

    pub fn merge(self, other: Extent<T>) -> Extent<T> {
        Extent {
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        }
    }

    pub fn merge_opt(a: Option<Self>, b: Option<Self>) -> Option<Self> {
        match (a, b) {
            (Some(a), Some(b)) => Some(a.merge(b)),
            (a, None) => a,
            (None, b) => b,
        }
    }
}

/// Moments and extent gathered in a single pass.
pub(crate) fn summarize<T: Scalar>(values: &[T]) -> (Moments, Option<Extent<T>>) {
    let Some(&first) = values.first() else {
        return (Moments::ZERO, None);
    };
    // same lane layout as `Moments::extend`, so the sums agree bit for bit
    let (mut sum, mut sum_sq) = ([0.0f64; 4], [0.0f64; 4]);
    let (mut lo, mut hi) = (first, first);
    let mut chunks = values.chunks_exact(4);
    for c in &mut chunks {
        for j in 0..4 {
            let x = c[j];
            let xf = x.to_f64_lossless();
            sum[j] += xf;
            sum_sq[j] += xf * xf;
            lo = if x < lo { x } else { lo };
            hi = if x > hi { x } else { hi };
        }
    }
    for (j, &x) in chunks.remainder().iter().enumerate() {
        let xf = x.to_f64_lossless();
        sum[j] += xf;
        sum_sq[j] += xf * xf;
        lo = if x < lo { x } else { lo };
        hi = if x > hi { x } else { hi };
    }
    let m = Moments {
        count: values.len() as u64,
        sum: (sum[0] + sum[1]) + (sum[2] + sum[3]),
        sum_sq: (sum_sq[0] + sum_sq[1]) + (sum_sq[2] + sum_sq[3]),
    };
    (m, Some(Extent { min: lo, max: hi }))
}
