//! Convergence studies against high-resolution reference solutions.
//!
//! A study takes every `(s, seed)` pair, draws one datum on the reference
//! mode square, evolves it once at `(K, τ_ref)` and then, for every step size
//! `τ` of the sweep, runs the scheme at `N(τ) = 2τ^{-1/2}` (rounded to even)
//! from `Π_θ` of the same datum, recording the `L²` distance to the reference
//! at the final time.

mod config;
mod export;
mod fit;
mod reference;
mod study;

pub use config::{ReferenceConfig, StudyConfig, TauValue};
pub use export::{read_plot_data, read_records, write_plot_data, write_records, CSV_HEADER};
pub use fit::{fit_order, fit_points, median_errors_by_theta, FitResult};
pub use reference::{compute_reference, compute_references, reference_key, Reference, SCHEME_VERSION};
pub use study::{
    l2_error, run_reference_sensitivity, run_study, ConvergenceRecord, RecordKey, StudyOptions, RESULTS_FILE,
};

use crate::error::{Error, Result};

/// `N = 2τ^{-1/2}` rounded to the nearest even integer (at least 2).
pub fn grid_for_tau(tau: f64) -> usize {
    let half = (1.0 / tau.sqrt()).round().max(1.0);
    2 * half as usize
}

/// Parses a step size written either as a decimal (`0.0009765625`) or as a
/// power of two (`2^-10`).
pub fn parse_tau(text: &str) -> Result<f64> {
    let t = text.trim();
    let value = if let Some(exp) = t.strip_prefix("2^") {
        let e: i32 = exp
            .trim_matches(|c| c == '(' || c == ')')
            .parse()
            .map_err(|_| Error::param(format!("cannot parse step size '{text}'")))?;
        2f64.powi(e)
    } else {
        t.parse::<f64>()
            .map_err(|_| Error::param(format!("cannot parse step size '{text}'")))?
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::param(format!("step size must be positive, got '{text}'")));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_coupling() {
        let got: Vec<_> = (8..=12).map(|e| grid_for_tau(2f64.powi(-e))).collect();
        assert_eq!(got, vec![32, 46, 64, 90, 128]);
        assert_eq!(grid_for_tau(2f64.powi(-16)), 512);
        assert_eq!(grid_for_tau(4.0), 2);
    }

    #[test]
    fn tau_syntax() {
        assert_eq!(parse_tau("2^-12").unwrap(), 2f64.powi(-12));
        assert_eq!(parse_tau("2^(-3)").unwrap(), 0.125);
        assert_eq!(parse_tau(" 0.25 ").unwrap(), 0.25);
        assert!(parse_tau("-1").is_err());
        assert!(parse_tau("2^x").is_err());
    }
}
