use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-continuous step CDF with ties merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfCurve {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

pub fn empirical_cdf(samples: &[f64]) -> Result<CdfCurve> {
    if samples.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::OutOfDomain {
            name: "sample",
            range: "finite",
            value: *bad,
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut values: Vec<f64> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    for (i, x) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        if values.last() == Some(x) {
            *probs.last_mut().unwrap() = p;
        } else {
            values.push(*x);
            probs.push(p);
        }
    }
    Ok(CdfCurve { values, probs })
}

impl CdfCurve {
    /// Build from stored points, checking monotonicity.
    pub fn from_points(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::Empty("CDF points"));
        }
        let ok = values.windows(2).all(|w| w[0] < w[1])
            && probs.windows(2).all(|w| w[0] <= w[1])
            && probs.iter().all(|p| (0.0..=1.0).contains(p));
        if !ok {
            return Err(Error::Parse("CDF points must be increasing with probabilities in [0, 1]".into()));
        }
        Ok(Self { values, probs })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|v| *v <= x);
        if k == 0 {
            0.0
        } else {
            self.probs[k - 1]
        }
    }

    /// Smallest stored value whose CDF reaches `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let k = self.probs.partition_point(|q| *q < p);
        self.values[k.min(self.values.len() - 1)]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Largest vertical gap between two step CDFs.
    pub fn max_distance(&self, other: &CdfCurve) -> f64 {
        self.values
            .iter()
            .chain(&other.values)
            .map(|x| (self.eval(*x) - other.eval(*x)).abs())
            .fold(0.0, f64::max)
    }
}
