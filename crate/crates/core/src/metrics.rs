//! Accuracy of a trained stack against a reference field, evaluated at
//! every node of the reference grid.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::godunov::DensityField;
use crate::stacked::StackedPinn;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub stage: usize,
    pub relative_l2: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub n_eval_points: usize,
}

impl ErrorReport {
    pub fn from_values(stage: usize, truth: &[f64], pred: &[f64]) -> Result<Self> {
        let relative_l2 = relative_l2_values(truth, pred)?;
        let mut errors: Vec<f64> = truth.iter().zip(pred).map(|(u, v)| (v - u).abs()).collect();
        errors.sort_by(f64::total_cmp);
        Ok(Self {
            stage,
            relative_l2,
            min: errors[0],
            q1: quantile_sorted(&errors, 0.25),
            median: quantile_sorted(&errors, 0.5),
            q3: quantile_sorted(&errors, 0.75),
            max: errors[errors.len() - 1],
            n_eval_points: errors.len(),
        })
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("relative_l2", self.relative_l2),
            ("min", self.min),
            ("q1", self.q1),
            ("median", self.median),
            ("q3", self.q3),
            ("max", self.max),
        ] {
            writeln!(s, "{k} = {v:e}").unwrap();
        }
        writeln!(s, "stage = {}", self.stage).unwrap();
        writeln!(s, "n_eval_points = {}", self.n_eval_points).unwrap();
        s
    }

    pub const CSV_HEADER: &'static str = "stage,relative_l2,min,q1,median,q3,max,n_eval_points";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            self.stage,
            self.relative_l2,
            self.min,
            self.q1,
            self.median,
            self.q3,
            self.max,
            self.n_eval_points
        )
    }
}

/// `‖u − û‖₂ / ‖u‖₂` over paired samples.
pub fn relative_l2_values(truth: &[f64], pred: &[f64]) -> Result<f64> {
    if truth.len() != pred.len() {
        return Err(Error::WidthMismatch {
            expected: truth.len(),
            got: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty("evaluation grid"));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (u, v) in truth.iter().zip(pred) {
        num += (u - v) * (u - v);
        den += u * u;
    }
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((num / den).sqrt())
}

/// Quantile of sorted data, linearly interpolated between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn predict_on_grid(truth: &DensityField, model: &StackedPinn, stage: usize) -> Result<Vec<f64>> {
    model.predict(stage, &truth.nodes())
}

pub fn relative_l2(truth: &DensityField, model: &StackedPinn, stage: usize) -> Result<f64> {
    relative_l2_values(truth.values(), &predict_on_grid(truth, model, stage)?)
}

pub fn error_distribution(
    truth: &DensityField,
    model: &StackedPinn,
    stage: usize,
) -> Result<ErrorReport> {
    ErrorReport::from_values(stage, truth.values(), &predict_on_grid(truth, model, stage)?)
}

/// `(i, relative L²)` for every stage `i = 0..=n` of one model.
pub fn stage_error_table(truth: &DensityField, model: &StackedPinn) -> Result<Vec<(usize, f64)>> {
    (0..=model.n_blocks())
        .map(|i| Ok((i, relative_l2(truth, model, i)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_l2_examples() {
        let u = [0.2, 0.5, 0.9];
        assert_eq!(relative_l2_values(&u, &u).unwrap(), 0.0);
        let doubled: Vec<f64> = u.iter().map(|v| 2.0 * v).collect();
        assert!((relative_l2_values(&u, &doubled).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(relative_l2_values(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(
            relative_l2_values(&[0.0, 0.0], &[1.0, 1.0]),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn quantiles() {
        let r = ErrorReport::from_values(0, &[0.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap_err();
        assert!(matches!(r, Error::ZeroNorm));
        let r = ErrorReport::from_values(0, &[1.0; 5], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!((r.min, r.q1, r.median, r.q3, r.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        assert_eq!(quantile_sorted(&[0.0, 10.0], 0.25), 2.5);
    }

    #[test]
    fn perfect_prediction_has_zero_quantiles() {
        let u = [0.1, 0.4, 0.7, 0.2];
        let r = ErrorReport::from_values(1, &u, &u).unwrap();
        assert_eq!([r.min, r.q1, r.median, r.q3, r.max, r.relative_l2], [0.0; 6]);
    }
}
