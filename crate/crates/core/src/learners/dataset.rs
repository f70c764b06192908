//! Lagged regression datasets built from a subseries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::Subseries;

/// Supervised rows: each input row holds the `p` most recent past values
/// (most recent first), the target is the current value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDataset<T> {
    pub inputs: Vec<Vec<T>>,
    pub targets: Vec<T>,
}

impl<T: Scalar> RegressionDataset<T> {
    pub fn new(inputs: Vec<Vec<T>>, targets: Vec<T>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::Validation(format!(
                "{} input rows vs {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if inputs.is_empty() {
            return Err(Error::Validation("empty dataset".into()));
        }
        let width = inputs[0].len();
        if width == 0 || inputs.iter().any(|r| r.len() != width) {
            return Err(Error::Validation("ragged or zero-width input rows".into()));
        }
        Ok(RegressionDataset { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn width(&self) -> usize {
        self.inputs[0].len()
    }

    /// Chronological head/tail split at `index` rows.
    pub fn split_at(&self, index: usize) -> Result<(RegressionDataset<T>, RegressionDataset<T>)> {
        if index == 0 || index >= self.len() {
            return Err(Error::Validation(format!(
                "split index {index} leaves an empty partition of {} rows",
                self.len()
            )));
        }
        Ok((
            RegressionDataset {
                inputs: self.inputs[..index].to_vec(),
                targets: self.targets[..index].to_vec(),
            },
            RegressionDataset {
                inputs: self.inputs[index..].to_vec(),
                targets: self.targets[index..].to_vec(),
            },
        ))
    }
}

/// Builds the autoregressive dataset `X(t) = f(X(t-1), ..., X(t-p))`: one row
/// per target `s[t]` for `t = p..len`, chronological order.
pub fn make_lagged_dataset<T: Scalar>(s: &Subseries<T>, p: usize) -> Result<RegressionDataset<T>> {
    if p == 0 {
        return Err(Error::InvalidParameter {
            name: "lag",
            reason: "must be at least 1".into(),
        });
    }
    if s.len() <= p {
        return Err(Error::SeriesTooShort {
            need: p + 1,
            got: s.len(),
        });
    }
    let mut inputs = Vec::with_capacity(s.len() - p);
    let mut targets = Vec::with_capacity(s.len() - p);
    for t in p..s.len() {
        inputs.push((1..=p).map(|lag| s.values[t - lag]).collect());
        targets.push(s.values[t]);
    }
    RegressionDataset::new(inputs, targets)
}
