//! Fully connected layer: y = x W^T + b.

use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::tensor::{gemm_nn, gemm_nt, gemm_tn, Param, Scalar, Tensor};

use super::Mode;

pub struct Linear<T> {
    /// (out_features, in_features)
    pub weight: Param<T>,
    /// (out_features)
    pub bias: Param<T>,
    cached_input: Option<Tensor<T>>,
}

impl<T: Scalar> Linear<T> {
    pub fn new(in_features: usize, out_features: usize, rng: &mut RngState) -> Self {
        let std = (2.0 / in_features as f64).sqrt();
        let data = (0..out_features * in_features)
            .map(|_| T::from_f64(rng.normal() * std))
            .collect();
        Linear {
            weight: Param::new(Tensor::from_vec(&[out_features, in_features], data)),
            bias: Param::new(Tensor::zeros(&[out_features])),
            cached_input: None,
        }
    }

    pub fn in_features(&self) -> usize {
        self.weight.value.shape()[1]
    }

    pub fn out_features(&self) -> usize {
        self.weight.value.shape()[0]
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        let (n, f) = x.dims2();
        if f != self.in_features() {
            return Err(Error::ShapeMismatch(format!(
                "linear expects {} input features, got {f}",
                self.in_features()
            )));
        }
        let out = self.out_features();
        let mut y = Tensor::zeros(&[n, out]);
        for row in 0..n {
            y.data_mut()[row * out..(row + 1) * out].copy_from_slice(self.bias.value.data());
        }
        gemm_nt(x.data(), self.weight.value.data(), y.data_mut(), n, f, out);
        if mode == Mode::Train {
            self.cached_input = Some(x.clone());
        }
        Ok(y)
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let x = self
            .cached_input
            .as_ref()
            .expect("linear backward without a train-mode forward");
        let (n, f) = x.dims2();
        let out = self.out_features();
        // dW += dy^T x ; db += column sums of dy ; dx = dy W.
        gemm_tn(dy.data(), x.data(), self.weight.grad.data_mut(), n, out, f);
        for row in 0..n {
            for (db, &g) in self
                .bias
                .grad
                .data_mut()
                .iter_mut()
                .zip(&dy.data()[row * out..(row + 1) * out])
            {
                *db += g;
            }
        }
        let mut dx = Tensor::zeros(&[n, f]);
        gemm_nn(dy.data(), self.weight.value.data(), dx.data_mut(), n, out, f);
        dx
    }
}
