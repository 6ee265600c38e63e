//! Spearman rank correlation with average ranks for ties.

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Correlation {
    Rho { rho: f64 },
    /// One side is constant, so the coefficient is undefined.
    NoVariance,
}

impl Correlation {
    pub fn rho(self) -> Option<f64> {
        match self {
            Correlation::Rho { rho } => Some(rho),
            Correlation::NoVariance => None,
        }
    }
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<Correlation, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(StatsError::InsufficientData {
            needed: 2,
            got: xs.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::Numeric("non-finite input".into()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = xs.len() as f64;
    let total = (n * n * n - n) / 12.0;
    let ties = |r: &[f64]| -> f64 {
        let mut sorted = r.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut correction = 0.0;
        let mut i = 0;
        while i < sorted.len() {
            let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
            let t = j as f64;
            correction += (t * t * t - t) / 12.0;
            i += j;
        }
        correction
    };
    let sx = total - ties(&rx);
    let sy = total - ties(&ry);
    if sx == 0.0 || sy == 0.0 {
        return Ok(Correlation::NoVariance);
    }
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    let rho = (sx + sy - d2) / (2.0 * (sx * sy).sqrt());
    Ok(Correlation::Rho {
        rho: rho.clamp(-1.0, 1.0),
    })
}
