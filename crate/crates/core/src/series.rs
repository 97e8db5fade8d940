//! Time-ordered coverage series and its `epoch,coverage` CSV form.

use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "epoch,coverage";

/// Strictly epoch-ordered observations `y_1..y_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSeries {
    epochs: Vec<i64>,
    values: Vec<f64>,
}

impl CoverageSeries {
    pub fn new(epochs: Vec<i64>, values: Vec<f64>) -> Result<Self> {
        if epochs.len() != values.len() {
            return Err(Error::param(format!(
                "{} epochs but {} values",
                epochs.len(),
                values.len()
            )));
        }
        if epochs.is_empty() {
            return Err(Error::param("series is empty"));
        }
        if let Some(w) = epochs.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::param(format!(
                "epochs must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite value {v} in series")));
        }
        Ok(Self { epochs, values })
    }

    /// Series labelled `start, start+1, ...`.
    pub fn from_values(start: i64, values: Vec<f64>) -> Result<Self> {
        let epochs = (0..values.len() as i64).map(|i| start + i).collect();
        Self::new(epochs, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn epochs(&self) -> &[i64] {
        &self.epochs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * (self.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (e, v) in self.epochs.iter().zip(&self.values) {
            out.push_str(&format!("{e},{v:.6}\n"));
        }
        out
    }

    /// Parses CSV text; `origin` only labels error messages.
    pub fn parse_csv(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, detail: String| Error::Csv {
            path: origin.to_path_buf(),
            line,
            detail,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim() == CSV_HEADER => {}
            Some((i, header)) => {
                return Err(err(i + 1, format!("expected header {CSV_HEADER:?}, got {header:?}")))
            }
            None => return Err(err(1, "empty file".into())),
        }
        let mut epochs = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines {
            let (e, v) = line
                .split_once(',')
                .ok_or_else(|| err(i + 1, format!("expected two fields in {line:?}")))?;
            let epoch: i64 = e
                .trim()
                .parse()
                .map_err(|_| err(i + 1, format!("epoch {e:?} is not an integer")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| err(i + 1, format!("coverage {v:?} is not a number")))?;
            if !value.is_finite() {
                return Err(err(i + 1, format!("coverage {v:?} is not finite")));
            }
            if let Some(&prev) = epochs.last() {
                if epoch <= prev {
                    return Err(err(i + 1, format!("epoch {epoch} does not follow {prev}")));
                }
            }
            epochs.push(epoch);
            values.push(value);
        }
        if epochs.is_empty() {
            return Err(err(2, "no data rows".into()));
        }
        Self::new(epochs, values)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Sample mean and the variance MLE (divisor n).
    pub fn mean_and_mle_variance(&self) -> (f64, f64) {
        mean_and_mle_variance(&self.values)
    }
}

pub(crate) fn mean_and_mle_variance(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Unbiased sample variance; `None` for fewer than two points.
pub(crate) fn sample_variance(y: &[f64]) -> Option<f64> {
    if y.len() < 2 {
        return None;
    }
    let (_, mle) = mean_and_mle_variance(y);
    Some(mle * y.len() as f64 / (y.len() - 1) as f64)
}
