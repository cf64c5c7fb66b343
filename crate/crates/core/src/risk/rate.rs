use serde::Serialize;

use super::RiskEstimate;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub n: usize,
    pub excess: f64,
    pub se: f64,
}

/// Least-squares fit of `log excess = intercept + slope log n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFitResult {
    /// Sorted by `n`.
    pub series: Vec<RatePoint>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// Exponent `e` of the predicted `n^{-e}`.
    pub theoretical: f64,
    /// Points with positive excess that entered the fit.
    pub points_used: usize,
}

impl RateFitResult {
    /// `|slope + theoretical| <= tolerance`.
    pub fn within(&self, tolerance: f64) -> bool {
        (self.slope + self.theoretical).abs() <= tolerance
    }
}

pub fn rate_fit(series: &[(usize, RiskEstimate)], theoretical: f64) -> Result<RateFitResult> {
    let mut pts: Vec<RatePoint> = series.iter().map(|(n, r)| RatePoint { n: *n, excess: r.value, se: r.se }).collect();
    pts.sort_by_key(|p| p.n);
    let used: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.excess > 0.0 && p.n > 0)
        .map(|p| ((p.n as f64).ln(), p.excess.ln()))
        .collect();
    if !pts.is_empty() && used.is_empty() {
        return Err(Error::RateUndefined);
    }
    if used.len() < 3 {
        return Err(Error::InsufficientPoints(used.len()));
    }
    let k = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / k;
    let my = used.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidParameter("rate fit needs at least two distinct n".into()));
    }
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = used.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let slope_se = if used.len() > 2 { (rss / (k - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RateFitResult { series: pts, slope, intercept, slope_se, theoretical, points_used: used.len() })
}
