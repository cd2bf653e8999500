//! Pearson correlation and RMS calibration error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pearson's r. Errors on length mismatch, fewer than two points or a constant series.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations { needed: 2, found: x.len() });
    }
    let len = x.len() as f64;
    let mx = x.iter().sum::<f64>() / len;
    let my = y.iter().sum::<f64>() / len;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ConstantSeries("x".into()));
    }
    if syy == 0.0 {
        return Err(Error::ConstantSeries("y".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// One confidence bin: how many predictions fell in it, their mean confidence
/// and the fraction that were correct.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub count: usize,
    pub confidence: f64,
    pub accuracy: f64,
}

/// `sqrt(E_C[(P(Y = Ŷ | C = c) − c)^2])` over bins, weighted by bin population.
pub fn rms_calibration_error(bins: &[CalibrationBin]) -> Result<f64> {
    let total: usize = bins.iter().map(|b| b.count).sum();
    if total == 0 {
        return Err(Error::TooFewObservations { needed: 1, found: 0 });
    }
    let mse: f64 = bins
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| b.count as f64 / total as f64 * (b.accuracy - b.confidence).powi(2))
        .sum();
    Ok(mse.sqrt())
}

/// Bins raw predictions into `n_bins` equal-width confidence intervals on `[0, 1]`.
pub fn calibration_bins(confidence: &[f64], correct: &[bool], n_bins: usize) -> Result<Vec<CalibrationBin>> {
    if confidence.len() != correct.len() {
        return Err(Error::LengthMismatch(confidence.len(), correct.len()));
    }
    if n_bins == 0 {
        return Err(Error::InvalidConfig("need at least one calibration bin".into()));
    }
    if let Some(c) = confidence.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(Error::InvalidConfig(format!("confidence {c} outside [0, 1]")));
    }
    let mut sums = vec![(0usize, 0.0f64, 0usize); n_bins];
    for (&c, &ok) in confidence.iter().zip(correct) {
        let slot = ((c * n_bins as f64) as usize).min(n_bins - 1);
        sums[slot].0 += 1;
        sums[slot].1 += c;
        sums[slot].2 += ok as usize;
    }
    Ok(sums
        .into_iter()
        .map(|(count, conf, hits)| {
            if count == 0 {
                CalibrationBin { count: 0, confidence: 0.0, accuracy: 0.0 }
            } else {
                CalibrationBin { count, confidence: conf / count as f64, accuracy: hits as f64 / count as f64 }
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_lines() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let up: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &up).unwrap(), 1.0);
        assert_eq!(pearson(&x, &down).unwrap(), -1.0);
    }

    #[test]
    fn constant_series_is_an_error() {
        assert!(matches!(pearson(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]), Err(Error::ConstantSeries(_))));
        assert!(matches!(pearson(&[1.0], &[2.0]), Err(Error::TooFewObservations { .. })));
        assert!(matches!(pearson(&[1.0, 2.0], &[2.0]), Err(Error::LengthMismatch(2, 1))));
    }

    #[test]
    fn known_correlation() {
        // r = 0.8 for this classic textbook pair (hand-computed: sxy = 8, sxx = 10, syy = 10)
        let r = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-15);
    }

    #[test]
    fn calibrated_bins_have_zero_error() {
        let bins = [
            CalibrationBin { count: 10, confidence: 0.25, accuracy: 0.25 },
            CalibrationBin { count: 30, confidence: 0.75, accuracy: 0.75 },
        ];
        assert!(rms_calibration_error(&bins).unwrap() <= 1e-12);
    }

    #[test]
    fn miscalibration_value() {
        // one bin overconfident by 0.2, one calibrated, equal weight -> sqrt(0.02)
        let bins = [
            CalibrationBin { count: 5, confidence: 0.9, accuracy: 0.7 },
            CalibrationBin { count: 5, confidence: 0.5, accuracy: 0.5 },
        ];
        assert!((rms_calibration_error(&bins).unwrap() - 0.02f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn binning_raw_predictions() {
        let conf = [0.05, 0.15, 0.95, 0.95];
        let ok = [false, true, true, false];
        let bins = calibration_bins(&conf, &ok, 10).unwrap();
        assert_eq!(bins[0].count, 1);
        assert_eq!(bins[9].count, 2);
        assert_eq!(bins[9].accuracy, 0.5);
        assert!(calibration_bins(&[1.2], &[true], 10).is_err());
    }
}
