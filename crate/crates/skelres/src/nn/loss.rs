//! Softmax cross-entropy with max-subtraction stabilization.

use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Row-wise softmax of an (N, C) tensor.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Tensor<T> {
    let (n, c) = logits.dims2();
    let mut probs = Tensor::zeros(&[n, c]);
    for row in 0..n {
        let src = &logits.data()[row * c..(row + 1) * c];
        let dst = &mut probs.data_mut()[row * c..(row + 1) * c];
        let max = src.iter().cloned().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = (s - max).exp();
            sum += *d;
        }
        for d in dst.iter_mut() {
            *d /= sum;
        }
    }
    probs
}

/// One-hot encode class ids into an (N, C) tensor.
pub fn one_hot<T: Scalar>(labels: &[u32], classes: usize) -> Tensor<T> {
    let mut y = Tensor::zeros(&[labels.len(), classes]);
    for (row, &l) in labels.iter().enumerate() {
        assert!((l as usize) < classes, "label {l} >= class count {classes}");
        y.data_mut()[row * classes + l as usize] = T::one();
    }
    y
}

/// Mean cross-entropy over the batch and the gradient with respect to the
/// logits, `(softmax(logits) - y) / N`.
pub fn softmax_cross_entropy<T: Scalar>(
    logits: &Tensor<T>,
    targets: &Tensor<T>,
) -> Result<(T, Tensor<T>)> {
    let (n, c) = logits.dims2();
    if targets.shape() != logits.shape() {
        return Err(Error::ShapeMismatch(format!(
            "targets {:?} vs logits {:?}",
            targets.shape(),
            logits.shape()
        )));
    }
    // Each target row must be exactly one-hot.
    for row in 0..n {
        let t = &targets.data()[row * c..(row + 1) * c];
        let ones = t.iter().filter(|&&v| v == T::one()).count();
        let zeros = t.iter().filter(|&&v| v == T::zero()).count();
        if ones != 1 || zeros != c - 1 {
            return Err(Error::NotOneHot(row));
        }
    }

    let probs = softmax(logits);
    let inv_n = T::one() / T::from_f64(n as f64);
    let mut loss = T::zero();
    let mut grad = probs.clone();
    for i in 0..n * c {
        let y = targets.data()[i];
        if y == T::one() {
            loss -= probs.data()[i].max(T::from_f64(1e-300)).ln();
        }
        grad.data_mut()[i] = (probs.data()[i] - y) * inv_n;
    }
    Ok((loss * inv_n, grad))
}

/// Convenience wrapper taking 0-based class ids.
pub fn softmax_cross_entropy_ids<T: Scalar>(
    logits: &Tensor<T>,
    labels: &[u32],
) -> Result<(T, Tensor<T>)> {
    let (_, c) = logits.dims2();
    softmax_cross_entropy(logits, &one_hot(labels, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_rows_are_distributions() {
        let logits = Tensor::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, -5.0, 0.0, 5.0]);
        let p = softmax(&logits);
        for row in 0..2 {
            let r = &p.data()[row * 3..(row + 1) * 3];
            assert!(r.iter().all(|&v| v >= 0.0));
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn peaked_logits_drive_loss_to_zero() {
        let logits = Tensor::from_vec(&[1, 3], vec![100.0, 0.0, 0.0]);
        let (loss, _) = softmax_cross_entropy_ids(&logits, &[0]).unwrap();
        assert!(loss < 1e-10, "loss {loss}");
    }

    #[test]
    fn uniform_logits_give_log_c() {
        let logits = Tensor::from_vec(&[1, 4], vec![0.0; 4]);
        let (loss, _) = softmax_cross_entropy_ids(&logits, &[2]).unwrap();
        assert!((loss - 4.0f64.ln()).abs() < 1e-12); // ln 4 ~ 1.386294
    }

    #[test]
    fn rejects_non_one_hot_targets() {
        let logits = Tensor::from_vec(&[1, 3], vec![0.0; 3]);
        let bad = Tensor::from_vec(&[1, 3], vec![0.5, 0.5, 0.0]);
        assert!(matches!(
            softmax_cross_entropy(&logits, &bad),
            Err(Error::NotOneHot(0))
        ));
        let two_hot = Tensor::from_vec(&[1, 3], vec![1.0, 1.0, 0.0]);
        assert!(softmax_cross_entropy(&logits, &two_hot).is_err());
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let logits = Tensor::<f64>::from_vec(&[1, 3], vec![1000.0, -1000.0, 999.0]);
        let (loss, grad) = softmax_cross_entropy_ids(&logits, &[1]).unwrap();
        assert!(loss.is_finite());
        assert!(grad.data().iter().all(|v| v.is_finite()));
    }
}
