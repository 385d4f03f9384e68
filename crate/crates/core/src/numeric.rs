//! Small numeric helpers shared across modules.

/// Neumaier-compensated running sum.
///
/// Block incentives and conservation checks add hundreds of thousands of
/// fees of very different magnitudes; plain `f64` accumulation drifts by
/// more than the conservation tolerance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, compensation: 0.0 }
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of a sequence.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// `ceil(log_base(n))` computed with integer arithmetic, for `n >= 1`.
///
/// Returns 0 for `n == 1`.
pub fn ceil_log(n: u64, base: u64) -> u32 {
    assert!(base >= 2, "logarithm base must be at least 2");
    let mut levels = 0;
    let mut reach: u128 = 1;
    while reach < n as u128 {
        reach *= base as u128;
        levels += 1;
    }
    levels
}

/// `floor(log_base(n))` with integer arithmetic, for `n >= 1`.
pub fn floor_log(n: u64, base: u64) -> u32 {
    assert!(base >= 2, "logarithm base must be at least 2");
    assert!(n >= 1, "logarithm of zero");
    let mut levels = 0;
    let mut rest = n;
    while rest >= base {
        rest /= base;
        levels += 1;
    }
    levels
}
