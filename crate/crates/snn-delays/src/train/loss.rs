//! Cross-entropy loss over accumulated logits.

use crate::error::{Result, SnnError};

/// Numerically stabilized log-sum-exp.
fn log_sum_exp(logits: &[f64]) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + logits.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Cross entropy against a hard label. Returns `(loss, dlogits)` with
/// `dlogits = softmax(logits) - onehot(label)`.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= logits.len() {
        return Err(SnnError::InvalidArg(format!(
            "label {label} out of range for {} classes",
            logits.len()
        )));
    }
    let lse = log_sum_exp(logits);
    let loss = lse - logits[label];
    let mut d: Vec<f64> = logits.iter().map(|&x| (x - lse).exp()).collect();
    d[label] -= 1.0;
    Ok((loss, d))
}

/// Cross entropy against a soft target distribution (mixed labels).
pub fn cross_entropy_soft(logits: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if target.len() != logits.len() {
        return Err(SnnError::dim(
            "cross_entropy_soft",
            format!("{} targets for {} logits", target.len(), logits.len()),
        ));
    }
    let lse = log_sum_exp(logits);
    let mut loss = 0.0;
    for (&x, &q) in logits.iter().zip(target) {
        if q != 0.0 {
            loss += q * (lse - x);
        }
    }
    let d: Vec<f64> = logits
        .iter()
        .zip(target)
        .map(|(&x, &q)| (x - lse).exp() - q)
        .collect();
    Ok((loss, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_give_ln_k() {
        let logits = vec![0.7; 20];
        let (loss, d) = cross_entropy(&logits, 3).unwrap();
        assert!((loss - (20.0f64).ln()).abs() < 1e-12);
        // Gradient sums to zero.
        assert!(d.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn huge_margin_drives_loss_to_zero() {
        let (loss, _) = cross_entropy(&[500.0, 0.0, -3.0], 0).unwrap();
        assert!(loss < 1e-12, "loss {loss}");
    }

    #[test]
    fn two_class_closed_form() {
        let (loss, _) = cross_entropy(&[1.0, 0.0], 0).unwrap();
        assert!((loss - (1.0 + (-1.0f64).exp()).ln()).abs() < 1e-12);
    }

    #[test]
    fn label_out_of_range_is_error() {
        assert!(cross_entropy(&[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn soft_reduces_to_hard_on_onehot() {
        let logits = [0.3, -1.0, 2.0];
        let (l_hard, d_hard) = cross_entropy(&logits, 2).unwrap();
        let (l_soft, d_soft) = cross_entropy_soft(&logits, &[0.0, 0.0, 1.0]).unwrap();
        assert!((l_hard - l_soft).abs() < 1e-12);
        for (a, b) in d_hard.iter().zip(&d_soft) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use crate::math::finite_diff_grad;
        let logits = vec![0.4, -0.2, 1.1, 0.0];
        let target = vec![0.6, 0.1, 0.3, 0.0];
        let (_, d) = cross_entropy_soft(&logits, &target).unwrap();
        let fd = finite_diff_grad(
            |x| cross_entropy_soft(x, &target).unwrap().0,
            &logits,
            1e-6,
        )
        .unwrap();
        for (a, b) in d.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
