use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Pearson and Spearman coefficients. A coefficient is `None` when it is
/// undefined because one of the inputs is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
}

impl Correlation {
    pub fn pearson(&self) -> Result<f64, MetricsError> {
        self.pearson.ok_or(MetricsError::ConstantInput)
    }

    pub fn spearman(&self) -> Result<f64, MetricsError> {
        self.spearman.ok_or(MetricsError::ConstantInput)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Pearson's r, or `None` if either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

pub fn correlate(metric_scores: &[f64], human_scores: &[f64]) -> Result<Correlation, MetricsError> {
    if metric_scores.len() != human_scores.len() {
        return Err(MetricsError::LengthMismatch(metric_scores.len(), human_scores.len()));
    }
    if metric_scores.len() < 3 {
        return Err(MetricsError::TooFewPoints(metric_scores.len()));
    }
    Ok(Correlation {
        pearson: pearson(metric_scores, human_scores),
        spearman: pearson(&average_ranks(metric_scores), &average_ranks(human_scores)),
    })
}
