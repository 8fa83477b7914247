//! Global mean pooling: (N, C, H, W) -> (N, C).

use crate::tensor::{Scalar, Tensor};

use super::Mode;

#[derive(Default)]
pub struct GlobalMeanPool {
    input_shape: Option<Vec<usize>>,
}

impl GlobalMeanPool {
    pub fn new() -> Self {
        GlobalMeanPool::default()
    }

    pub fn forward<T: Scalar>(&mut self, x: &Tensor<T>, mode: Mode) -> Tensor<T> {
        let (n, c, h, w) = x.dims4();
        let plane = h * w;
        let inv = T::one() / T::from_f64(plane as f64);
        let mut y = Tensor::zeros(&[n, c]);
        for i in 0..n * c {
            let mut acc = T::zero();
            for &v in &x.data()[i * plane..(i + 1) * plane] {
                acc += v;
            }
            y.data_mut()[i] = acc * inv;
        }
        if mode == Mode::Train {
            self.input_shape = Some(x.shape().to_vec());
        }
        y
    }

    pub fn backward<T: Scalar>(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let shape = self
            .input_shape
            .as_ref()
            .expect("pool backward without a train-mode forward");
        let plane = shape[2] * shape[3];
        let inv = T::one() / T::from_f64(plane as f64);
        let mut dx = Tensor::zeros(shape);
        for i in 0..shape[0] * shape[1] {
            let g = dy.data()[i] * inv;
            for v in &mut dx.data_mut()[i * plane..(i + 1) * plane] {
                *v = g;
            }
        }
        dx
    }
}
