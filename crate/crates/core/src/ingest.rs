//! Transaction datasets: CSV loading and export, seeded synthetic streams,
//! and irrational-user fee perturbation.
//!
//! CSV schema (UTF-8, header row): `id,amount,arrival_time_ms[,fee]`. When
//! the fee column is absent, fees are `amount * commission_ratio`.

use std::fs::File;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::MIN_POSITIVE_FEE;
use crate::model::{Transaction, TxId, DEFAULT_ARRIVAL_RATE_TPS, DEFAULT_COMMISSION_RATIO, DEFAULT_TX_SIZE_BYTES};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}")]
    Open { path: String, source: io::Error },
    #[error("missing required column {0:?}")]
    MissingColumn(&'static str),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: arrival_time_ms {arrival} precedes the previous row's {previous}")]
    Unordered { line: u64, arrival: u64, previous: u64 },
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
    #[error("invalid irrational mix: {0}")]
    InvalidMix(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn load_csv(path: impl AsRef<Path>, commission_ratio: f64) -> Result<Vec<Transaction>, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Open { path: path.display().to_string(), source })?;
    load_reader(io::BufReader::new(file), commission_ratio)
}

pub fn load_reader<R: io::Read>(reader: R, commission_ratio: f64) -> Result<Vec<Transaction>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &'static str| headers.iter().position(|h| h == name);
    let id_col = col("id").ok_or(IngestError::MissingColumn("id"))?;
    let amount_col = col("amount").ok_or(IngestError::MissingColumn("amount"))?;
    let time_col = col("arrival_time_ms").ok_or(IngestError::MissingColumn("arrival_time_ms"))?;
    let fee_col = col("fee");

    let mut out = Vec::new();
    let mut previous: Option<u64> = None;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| {
            record
                .get(i)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| IngestError::Malformed { line, message: format!("empty {name}") })
        };
        let bad = |name: &str, raw: &str| IngestError::Malformed { line, message: format!("invalid {name} {raw:?}") };

        let raw = field(id_col, "id")?;
        let id: TxId = raw.parse().map_err(|_| bad("id", raw))?;
        let raw = field(amount_col, "amount")?;
        let amount: f64 = raw.parse().map_err(|_| bad("amount", raw))?;
        if !(amount.is_finite() && amount >= 0.0) {
            return Err(bad("amount", raw));
        }
        let raw = field(time_col, "arrival_time_ms")?;
        let arrival: u64 = raw.parse().map_err(|_| bad("arrival_time_ms", raw))?;
        let fee = match fee_col.and_then(|c| record.get(c)).filter(|s| !s.is_empty()) {
            Some(raw) => {
                let fee: f64 = raw.parse().map_err(|_| bad("fee", raw))?;
                if !(fee.is_finite() && fee >= 0.0) {
                    return Err(bad("fee", raw));
                }
                fee
            }
            None => amount * commission_ratio,
        };
        if let Some(prev) = previous {
            if arrival < prev {
                return Err(IngestError::Unordered { line, arrival, previous: prev });
            }
        }
        previous = Some(arrival);
        out.push(Transaction { id, amount, fee, arrival_time: arrival, size_bytes: DEFAULT_TX_SIZE_BYTES });
    }
    Ok(out)
}

/// Writes the stream with an explicit fee column. Values use the shortest
/// round-trip representation, so reloading reproduces the stream exactly.
pub fn write_csv<W: io::Write>(txs: &[Transaction], out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "amount", "arrival_time_ms", "fee"])?;
    for t in txs {
        w.write_record([t.id.to_string(), t.amount.to_string(), t.arrival_time.to_string(), t.fee.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Synthetic stream parameters. Amounts are log-normal in `ln(amount)`.
///
/// The default amount location puts the median fee near `e^(6.94 - 5)`,
/// below the log-normal location of the reference strategy, with a wide
/// spread so that the allocation CDF covers most of its range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSpec {
    pub count: usize,
    pub arrival_rate_tps: f64,
    pub amount_log_mean: f64,
    pub amount_log_sd: f64,
    pub commission_ratio: f64,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            count: 400_000,
            arrival_rate_tps: DEFAULT_ARRIVAL_RATE_TPS,
            amount_log_mean: 8.155,
            amount_log_sd: 1.5,
            commission_ratio: DEFAULT_COMMISSION_RATIO,
            seed: 0,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.count == 0 {
            return Err(IngestError::InvalidSpec("count must be positive".into()));
        }
        if !(self.arrival_rate_tps > 0.0 && self.arrival_rate_tps.is_finite()) {
            return Err(IngestError::InvalidSpec(format!(
                "arrival rate must be positive (got {})",
                self.arrival_rate_tps
            )));
        }
        if !self.amount_log_mean.is_finite() || !(self.amount_log_sd >= 0.0 && self.amount_log_sd.is_finite()) {
            return Err(IngestError::InvalidSpec("amount distribution parameters must be finite, sd >= 0".into()));
        }
        if !(self.commission_ratio > 0.0 && self.commission_ratio.is_finite()) {
            return Err(IngestError::InvalidSpec(format!(
                "commission ratio must be positive (got {})",
                self.commission_ratio
            )));
        }
        Ok(())
    }
}

/// Poisson arrivals (exponential gaps, ms resolution) with log-normal
/// amounts and rational fees. Ids are `0..count`.
pub fn generate(spec: &DatasetSpec) -> Result<Vec<Transaction>, IngestError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gaps = Exp::new(spec.arrival_rate_tps).expect("validated rate");
    let amounts = LogNormal::new(spec.amount_log_mean, spec.amount_log_sd).expect("validated amount law");
    let mut t = 0.0f64;
    let mut out = Vec::with_capacity(spec.count);
    for id in 0..spec.count as TxId {
        t += gaps.sample(&mut rng);
        let amount = amounts.sample(&mut rng);
        let arrival = (t * 1000.0).floor() as u64;
        out.push(Transaction::rational(id, amount, arrival, spec.commission_ratio));
    }
    Ok(out)
}

/// Shares of rational, overpaying and underpaying users, and the fee
/// multiplier ranges applied to the latter two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IrrationalMix {
    pub rational_fraction: f64,
    pub overpaid_fraction: f64,
    pub underpaid_fraction: f64,
    pub over_multiplier: (f64, f64),
    pub under_multiplier: (f64, f64),
}

impl Default for IrrationalMix {
    fn default() -> Self {
        Self {
            rational_fraction: 0.70,
            overpaid_fraction: 0.15,
            underpaid_fraction: 0.15,
            over_multiplier: (1.5, 3.0),
            under_multiplier: (0.1, 0.7),
        }
    }
}

impl IrrationalMix {
    pub fn rational() -> Self {
        Self { rational_fraction: 1.0, overpaid_fraction: 0.0, underpaid_fraction: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let fractions = [self.rational_fraction, self.overpaid_fraction, self.underpaid_fraction];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(IngestError::InvalidMix("fractions must lie in [0, 1]".into()));
        }
        let total: f64 = fractions.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(IngestError::InvalidMix(format!("fractions sum to {total}, not 1")));
        }
        for (name, (lo, hi)) in [("over", self.over_multiplier), ("under", self.under_multiplier)] {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
                return Err(IngestError::InvalidMix(format!("{name}_multiplier range [{lo}, {hi}] is invalid")));
            }
        }
        Ok(())
    }
}

/// Multiplies the fees of a seeded random subset: `round(n * overpaid)`
/// transactions by a uniform draw from the over range, `round(n *
/// underpaid)` others by one from the under range. Amounts, ids and order
/// are untouched. Fees that come out non-positive are raised to the
/// smallest positive fee.
pub fn inject_irrational(txs: &[Transaction], mix: &IrrationalMix, seed: u64) -> Result<Vec<Transaction>, IngestError> {
    mix.validate()?;
    let n = txs.len();
    let n_over = ((n as f64 * mix.overpaid_fraction).round() as usize).min(n);
    let n_under = ((n as f64 * mix.underpaid_fraction).round() as usize).min(n - n_over);
    let mut out = txs.to_vec();
    if n_over + n_under == 0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut clamped = 0usize;
    let groups = [(&order[..n_over], mix.over_multiplier), (&order[n_over..n_over + n_under], mix.under_multiplier)];
    for (indices, (lo, hi)) in groups {
        for &i in indices {
            let m = if lo < hi { rng.random_range(lo..hi) } else { lo };
            let fee = out[i].fee * m;
            out[i].fee = if fee > 0.0 {
                fee
            } else {
                clamped += 1;
                MIN_POSITIVE_FEE
            };
        }
    }
    if clamped > 0 {
        log::warn!("{clamped} perturbed fees were non-positive and clamped to the minimum positive fee");
    }
    Ok(out)
}
