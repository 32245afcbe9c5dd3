//! Forecast error metrics.

use crate::error::{Error, Result};

fn check(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / pred.len() as f64)
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / pred.len() as f64)
}

/// Root mean squared error divided by the range of `truth`.
///
/// A constant truth gives 0 for a perfect prediction and an error otherwise.
pub fn nrmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    let err = mse(pred, truth)?;
    let lo = truth.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = truth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range == 0.0 {
        return if err == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::ZeroTruthRange)
        };
    }
    Ok(libm::sqrt(err) / range)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 3.0]).unwrap(), 5.0);
        assert!(matches!(mse(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
        assert_eq!(mse(&[], &[]), Err(Error::EmptyInput));
    }

    #[test]
    fn mae_cases() {
        assert_eq!(mae(&[4.0], &[4.0]).unwrap(), 0.0);
        assert_eq!(mae(&[0.0, 0.0], &[1.0, 3.0]).unwrap(), 2.0);
    }

    #[test]
    fn nrmse_cases() {
        assert_eq!(nrmse(&[0.0, 10.0], &[0.0, 10.0]).unwrap(), 0.0);
        assert!((nrmse(&[1.0, 9.0], &[0.0, 10.0]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(nrmse(&[2.0, 2.0], &[2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(nrmse(&[1.0, 2.0], &[2.0, 2.0]), Err(Error::ZeroTruthRange));
    }

    #[test]
    fn mse_equals_mae_squared_for_equal_errors() {
        let truth = [1.0, -2.0, 5.0];
        let pred = [1.5, -2.5, 5.5];
        let (m, a) = (mse(&pred, &truth).unwrap(), mae(&pred, &truth).unwrap());
        assert!((m - a * a).abs() < 1e-15);
    }
}
