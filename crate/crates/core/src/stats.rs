//! Summary statistics for comparing runs.

use crate::error::{Error, Result};
use crate::greedy::EdgeSelection;

/// Pearson correlation of two equally long series.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "series lengths differ: {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput("need at least two samples".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput(
            "constant series has no correlation".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `|reference - other| / |reference|`.
pub fn relative_error(reference: f64, other: f64) -> f64 {
    if reference == other {
        0.0
    } else {
        (reference - other).abs() / reference.abs()
    }
}

/// Relative gaps `(eta, theta)` in final `R` and final `U` between a
/// reference selection and another one.
pub fn eta_theta(reference: &EdgeSelection, other: &EdgeSelection) -> Result<(f64, f64)> {
    let (a, b) = match (reference.final_metrics(), other.final_metrics()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::DegenerateInput("selection has no records".into())),
    };
    Ok((relative_error(a.r, b.r), relative_error(a.u, b.u)))
}
