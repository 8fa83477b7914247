//! Batch normalization over (N, H, W) per channel.

use crate::error::{Error, Result};
use crate::tensor::{Param, Scalar, Tensor};

use super::Mode;

pub const BN_EPS: f64 = 1e-5;
/// Fraction of the old running statistic kept per batch.
pub const BN_MOMENTUM: f64 = 0.9;

struct Cache<T> {
    xhat: Tensor<T>,
    inv_std: Vec<T>,
}

pub struct BatchNorm2d<T> {
    pub gamma: Param<T>,
    pub beta: Param<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    cache: Option<Cache<T>>,
    /// Batches folded into the running stats since `reset_calibration`.
    calib_count: usize,
}

impl<T: Scalar> BatchNorm2d<T> {
    pub fn new(channels: usize) -> Self {
        let mut gamma = Tensor::zeros(&[channels]);
        gamma.fill(T::one());
        BatchNorm2d {
            gamma: Param::new(gamma),
            beta: Param::new(Tensor::zeros(&[channels])),
            running_mean: vec![T::zero(); channels],
            running_var: vec![T::one(); channels],
            cache: None,
            calib_count: 0,
        }
    }

    /// Start a fresh statistics re-estimation; the next `Calibrate`
    /// forward overwrites the running stats, later ones fold in as a
    /// cumulative average over batches.
    pub fn reset_calibration(&mut self) {
        self.calib_count = 0;
    }

    pub fn channels(&self) -> usize {
        self.gamma.value.numel()
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        let (n, c, h, w) = x.dims4();
        if c != self.channels() {
            return Err(Error::ShapeMismatch(format!(
                "batch norm expects {} channels, got {c}",
                self.channels()
            )));
        }
        let plane = h * w;
        let count = n * plane;
        let eps = T::from_f64(BN_EPS);
        let mut y = Tensor::zeros(x.shape());

        match mode {
            Mode::Train => {
                if n < 2 {
                    return Err(Error::BatchTooSmall);
                }
                let momentum = T::from_f64(BN_MOMENTUM);
                let inv_count = T::one() / T::from_f64(count as f64);
                let mut xhat = Tensor::zeros(x.shape());
                let mut inv_stds = vec![T::zero(); c];
                for ci in 0..c {
                    let mut sum = T::zero();
                    let mut sq_sum = T::zero();
                    for ni in 0..n {
                        let base = (ni * c + ci) * plane;
                        for &v in &x.data()[base..base + plane] {
                            sum += v;
                            sq_sum += v * v;
                        }
                    }
                    let mean = sum * inv_count;
                    // Biased variance, clamped against rounding below zero.
                    let var = (sq_sum * inv_count - mean * mean).max(T::zero());
                    let inv_std = T::one() / (var + eps).sqrt();
                    inv_stds[ci] = inv_std;
                    self.running_mean[ci] =
                        momentum * self.running_mean[ci] + (T::one() - momentum) * mean;
                    self.running_var[ci] =
                        momentum * self.running_var[ci] + (T::one() - momentum) * var;
                    let g = self.gamma.value.data()[ci];
                    let b = self.beta.value.data()[ci];
                    for ni in 0..n {
                        let base = (ni * c + ci) * plane;
                        for i in base..base + plane {
                            let xh = (x.data()[i] - mean) * inv_std;
                            xhat.data_mut()[i] = xh;
                            y.data_mut()[i] = g * xh + b;
                        }
                    }
                }
                self.cache = Some(Cache {
                    xhat,
                    inv_std: inv_stds,
                });
            }
            Mode::Calibrate => {
                let inv_count = T::one() / T::from_f64(count as f64);
                // Cumulative average over the batches seen since
                // `reset_calibration` ("precise" statistics).
                let new_w = T::one() / T::from_f64((self.calib_count + 1) as f64);
                for ci in 0..c {
                    let mut sum = T::zero();
                    let mut sq_sum = T::zero();
                    for ni in 0..n {
                        let base = (ni * c + ci) * plane;
                        for &v in &x.data()[base..base + plane] {
                            sum += v;
                            sq_sum += v * v;
                        }
                    }
                    let mean = sum * inv_count;
                    let var = (sq_sum * inv_count - mean * mean).max(T::zero());
                    self.running_mean[ci] =
                        (T::one() - new_w) * self.running_mean[ci] + new_w * mean;
                    self.running_var[ci] =
                        (T::one() - new_w) * self.running_var[ci] + new_w * var;
                    let inv_std = T::one() / (var + eps).sqrt();
                    let g = self.gamma.value.data()[ci];
                    let b = self.beta.value.data()[ci];
                    for ni in 0..n {
                        let base = (ni * c + ci) * plane;
                        for i in base..base + plane {
                            y.data_mut()[i] = g * (x.data()[i] - mean) * inv_std + b;
                        }
                    }
                }
                self.calib_count += 1;
            }
            Mode::Eval => {
                for ci in 0..c {
                    let mean = self.running_mean[ci];
                    let inv_std = T::one() / (self.running_var[ci] + eps).sqrt();
                    let g = self.gamma.value.data()[ci];
                    let b = self.beta.value.data()[ci];
                    for ni in 0..n {
                        let base = (ni * c + ci) * plane;
                        for i in base..base + plane {
                            y.data_mut()[i] = g * (x.data()[i] - mean) * inv_std + b;
                        }
                    }
                }
            }
        }
        Ok(y)
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let cache = self
            .cache
            .as_ref()
            .expect("batch norm backward without a train-mode forward");
        let (n, c, h, w) = dy.dims4();
        let plane = h * w;
        let count = T::from_f64((n * plane) as f64);
        let mut dx = Tensor::zeros(dy.shape());
        for ci in 0..c {
            let mut dsum = T::zero();
            let mut dxhat_dot = T::zero();
            for ni in 0..n {
                let base = (ni * c + ci) * plane;
                for i in base..base + plane {
                    dsum += dy.data()[i];
                    dxhat_dot += dy.data()[i] * cache.xhat.data()[i];
                }
            }
            self.beta.grad.data_mut()[ci] += dsum;
            self.gamma.grad.data_mut()[ci] += dxhat_dot;
            let g = self.gamma.value.data()[ci];
            let scale = g * cache.inv_std[ci] / count;
            for ni in 0..n {
                let base = (ni * c + ci) * plane;
                for i in base..base + plane {
                    dx.data_mut()[i] = scale
                        * (count * dy.data()[i] - dsum - cache.xhat.data()[i] * dxhat_dot);
                }
            }
        }
        dx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    fn random_input(shape: &[usize], seed: u64) -> Tensor<f64> {
        let mut rng = RngState::seed_from(seed);
        Tensor::from_vec(
            shape,
            (0..shape.iter().product())
                .map(|_| rng.normal() * 3.0 + 1.0)
                .collect(),
        )
    }

    #[test]
    fn train_output_is_standardized_per_channel() {
        let x = random_input(&[4, 3, 5, 5], 7);
        let mut bn = BatchNorm2d::<f64>::new(3);
        let y = bn.forward(&x, Mode::Train).unwrap();
        let (n, c, h, w) = y.dims4();
        let plane = h * w;
        for ci in 0..c {
            let mut vals = Vec::new();
            for ni in 0..n {
                let base = (ni * c + ci) * plane;
                vals.extend_from_slice(&y.data()[base..base + plane]);
            }
            let mean: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
            let var: f64 =
                vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            assert!(mean.abs() < 1e-5, "channel {ci} mean {mean}");
            assert!((var - 1.0).abs() < 1e-5, "channel {ci} var {var}");
        }
    }

    #[test]
    fn standardized_input_passes_through() {
        // gamma=1, beta=0 on an already-standardized channel.
        let n = 1000;
        let mut data = Vec::with_capacity(2 * n);
        let mut rng = RngState::seed_from(3);
        for _ in 0..2 * n {
            data.push(rng.normal());
        }
        // Standardize exactly.
        let mean: f64 = data.iter().sum::<f64>() / data.len() as f64;
        let var: f64 =
            data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / data.len() as f64;
        for v in data.iter_mut() {
            *v = (*v - mean) / var.sqrt();
        }
        let x = Tensor::from_vec(&[2, 1, n, 1], data);
        let mut bn = BatchNorm2d::<f64>::new(1);
        let y = bn.forward(&x, Mode::Train).unwrap();
        for (yo, xi) in y.data().iter().zip(x.data()) {
            assert!((yo - xi).abs() < 1e-4);
        }
    }

    #[test]
    fn eval_on_constant_running_mean_input_yields_beta() {
        let mut bn = BatchNorm2d::<f64>::new(2);
        bn.running_mean = vec![3.0, -1.0];
        bn.running_var = vec![4.0, 0.25];
        bn.beta.value.data_mut().copy_from_slice(&[0.5, 2.0]);
        // Input equal to the running mean per channel.
        let mut x = Tensor::zeros(&[1, 2, 2, 2]);
        x.data_mut()[..4].iter_mut().for_each(|v| *v = 3.0);
        x.data_mut()[4..].iter_mut().for_each(|v| *v = -1.0);
        let y = bn.forward(&x, Mode::Eval).unwrap();
        for &v in &y.data()[..4] {
            assert!((v - 0.5).abs() < 1e-12);
        }
        for &v in &y.data()[4..] {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_batch_of_one_in_train_mode() {
        let mut bn = BatchNorm2d::<f64>::new(1);
        let x = Tensor::zeros(&[1, 1, 4, 4]);
        assert!(matches!(
            bn.forward(&x, Mode::Train),
            Err(Error::BatchTooSmall)
        ));
    }

    #[test]
    fn calibration_averages_batch_stats_exactly() {
        // Two calibrate passes: running stats become the plain average of
        // the two batches' stats, regardless of what training left behind.
        let a = random_input(&[4, 2, 3, 3], 21);
        let b = random_input(&[4, 2, 3, 3], 22);
        let mut bn = BatchNorm2d::<f64>::new(2);
        for _ in 0..7 {
            bn.forward(&a, Mode::Train).unwrap(); // pollute running stats
        }
        bn.reset_calibration();
        bn.forward(&a, Mode::Calibrate).unwrap();
        bn.forward(&b, Mode::Calibrate).unwrap();
        let plane = 3 * 3;
        for ci in 0..2 {
            let mut means = Vec::new();
            let mut vars = Vec::new();
            for x in [&a, &b] {
                let mut vals = Vec::new();
                for ni in 0..4 {
                    let base = (ni * 2 + ci) * plane;
                    vals.extend_from_slice(&x.data()[base..base + plane]);
                }
                let m: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
                means.push(m);
                vars.push(vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64);
            }
            assert!((bn.running_mean[ci] - (means[0] + means[1]) / 2.0).abs() < 1e-12);
            assert!((bn.running_var[ci] - (vars[0] + vars[1]) / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn calibrated_eval_matches_single_batch() {
        // After calibrating on one batch, eval output on that batch equals
        // the calibrate-mode output (both use the same statistics).
        let x = random_input(&[4, 2, 3, 3], 23);
        let mut bn = BatchNorm2d::<f64>::new(2);
        bn.reset_calibration();
        let yc = bn.forward(&x, Mode::Calibrate).unwrap();
        let ye = bn.forward(&x, Mode::Eval).unwrap();
        for (a, b) in yc.data().iter().zip(ye.data()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn running_stats_converge_to_batch_stats() {
        // Feeding the same batch repeatedly drives the running stats to the
        // batch stats, so eval output approaches train output.
        let x = random_input(&[8, 2, 4, 4], 11);
        let mut bn = BatchNorm2d::<f64>::new(2);
        let mut prev_diff = f64::INFINITY;
        for round in 0..5 {
            for _ in 0..50 {
                bn.forward(&x, Mode::Train).unwrap();
            }
            let train_y = bn.forward(&x, Mode::Train).unwrap();
            let eval_y = bn.forward(&x, Mode::Eval).unwrap();
            let diff: f64 = train_y
                .data()
                .iter()
                .zip(eval_y.data())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / train_y.numel() as f64;
            assert!(diff < prev_diff, "round {round}: {diff} !< {prev_diff}");
            prev_diff = diff;
        }
        assert!(prev_diff < 1e-6);
    }
}
