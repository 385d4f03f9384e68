//! Volatility of block incentives.
//!
//! Returns are `R_n = ln(I_n / I_{n-1})`; volatility is their sample
//! standard deviation (`n - 1` denominator).

use std::fmt;

use thiserror::Error;

use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("incentive at index {index} is not positive (got {value}); log return undefined")]
    NonPositive { index: usize, value: f64 },
    #[error("need at least {needed} values (got {got})")]
    TooShort { needed: usize, got: usize },
    #[error("window must be at least 2 (got {0})")]
    WindowTooSmall(usize),
    #[error("window of {window} returns exceeds the {available} available")]
    WindowTooLarge { window: usize, available: usize },
}

/// Where a return series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnSource {
    /// Consecutive block incentives.
    Block,
    /// Daily averages of incentive per block.
    Daily,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub source: ReturnSource,
}

pub fn log_returns(incentives: &[f64]) -> Result<ReturnSeries, MetricsError> {
    log_returns_from(incentives, ReturnSource::Block)
}

pub fn log_returns_from(incentives: &[f64], source: ReturnSource) -> Result<ReturnSeries, MetricsError> {
    if let Some((index, &value)) = incentives.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(MetricsError::NonPositive { index, value });
    }
    if incentives.len() < 2 {
        return Err(MetricsError::TooShort { needed: 2, got: incentives.len() });
    }
    // ln(a) - ln(b) would lose digits when a ≈ b; the ratio form does not.
    let values = incentives.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    Ok(ReturnSeries { values, source })
}

/// Sample standard deviation of the returns, two-pass with compensated sums.
pub fn volatility(returns: &[f64]) -> Result<f64, MetricsError> {
    let n = returns.len();
    if n < 2 {
        return Err(MetricsError::TooShort { needed: 2, got: n });
    }
    let mean = returns.iter().copied().collect::<CompensatedSum>().value() / n as f64;
    let ss = returns.iter().map(|r| (r - mean) * (r - mean)).collect::<CompensatedSum>().value();
    Ok((ss / (n - 1) as f64).sqrt())
}

/// Volatility of a whole incentive series.
pub fn incentive_volatility(incentives: &[f64]) -> Result<f64, MetricsError> {
    volatility(&log_returns(incentives)?.values)
}

/// Drops non-positive blocks (only possible with force-sealed empty tails)
/// with a warning, then computes the volatility.
pub fn incentive_volatility_lenient(incentives: &[f64]) -> Result<f64, MetricsError> {
    let kept: Vec<f64> = incentives.iter().copied().filter(|v| *v > 0.0 && v.is_finite()).collect();
    if kept.len() != incentives.len() {
        log::warn!("excluding {} non-positive block incentives from the return series", incentives.len() - kept.len());
    }
    incentive_volatility(&kept)
}

/// Volatility over every trailing window of `window` consecutive returns.
pub fn rolling_volatility(incentives: &[f64], window: usize) -> Result<Vec<f64>, MetricsError> {
    if window < 2 {
        return Err(MetricsError::WindowTooSmall(window));
    }
    let r = log_returns(incentives)?.values;
    if window > r.len() {
        return Err(MetricsError::WindowTooLarge { window, available: r.len() });
    }
    r.windows(window).map(volatility).collect()
}

/// Yearly block-incentive volatility, 2012-2020.
pub const HISTORICAL_VOLATILITY: [(u16, f64); 9] = [
    (2012, 0.238111),
    (2013, 0.200857),
    (2014, 0.218010),
    (2015, 0.180948),
    (2016, 0.073051),
    (2017, 0.063965),
    (2018, 0.045616),
    (2019, 0.037647),
    (2020, 0.059485),
];

pub const HISTORICAL_MIN: f64 = 0.037647;
pub const HISTORICAL_MAX: f64 = 0.238111;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkClass {
    Below,
    Within,
    Above,
}

impl fmt::Display for BenchmarkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchmarkClass::Below => "below",
            BenchmarkClass::Within => "within",
            BenchmarkClass::Above => "above",
        })
    }
}

/// Classifies against the inclusive historical range.
pub fn benchmark_check(vol: f64) -> BenchmarkClass {
    if vol < HISTORICAL_MIN {
        BenchmarkClass::Below
    } else if vol > HISTORICAL_MAX {
        BenchmarkClass::Above
    } else {
        BenchmarkClass::Within
    }
}
