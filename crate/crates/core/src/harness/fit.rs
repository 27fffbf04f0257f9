use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::harness::study::ConvergenceRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub s: f64,
    /// Empirical order in `θ`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit, in `log₂` units.
    pub residual: f64,
    /// `(log₂ θ, log₂ median error)` points the line was fitted to.
    pub points: Vec<(f64, f64)>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// `(θ, median error over seeds)` for regularity `s`, ascending in `θ`.
/// Failed rows are skipped.
pub fn median_errors_by_theta(records: &[ConvergenceRecord], s: f64) -> Vec<(f64, f64)> {
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.s == s) {
        if let Some(e) = r.l2_error {
            // positive f64 bit patterns sort like the values
            groups.entry(r.theta.to_bits()).or_default().push(e);
        }
    }
    groups
        .into_iter()
        .map(|(bits, mut errs)| (f64::from_bits(bits), median(&mut errs)))
        .collect()
}

/// `(log₂ θ, log₂ median error)` for regularity `s`.
pub fn fit_points(records: &[ConvergenceRecord], s: f64) -> Result<Vec<(f64, f64)>> {
    let med = median_errors_by_theta(records, s);
    if let Some((theta, _)) = med.iter().find(|(_, e)| *e <= 0.0) {
        return Err(Error::input(format!(
            "median error at theta = {theta} is zero; cannot fit on log axes"
        )));
    }
    Ok(med.into_iter().map(|(t, e)| (t.log2(), e.log2())).collect())
}

/// Least-squares line through `(log₂ θ, log₂ median error)`; needs at least
/// three distinct `θ`.
pub fn fit_order(records: &[ConvergenceRecord], s: f64) -> Result<FitResult> {
    let points = fit_points(records, s)?;
    if points.len() < 3 {
        return Err(Error::input(format!(
            "need at least 3 distinct theta values for s = {s}, found {}",
            points.len()
        )));
    }
    let (slope, intercept) = least_squares(&points);
    let residual = (points
        .iter()
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    Ok(FitResult {
        s,
        slope,
        intercept,
        residual,
        points,
    })
}

pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
