//! Elementwise activations: ReLU and inverted dropout.

use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::tensor::{Scalar, Tensor};

use super::Mode;

#[derive(Default)]
pub struct Relu<T> {
    mask: Option<Vec<bool>>,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Scalar> Relu<T> {
    pub fn new() -> Self {
        Relu {
            mask: None,
            _marker: std::marker::PhantomData,
        }
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Tensor<T> {
        let mut y = x.clone();
        y.data_mut()
            .iter_mut()
            .for_each(|v| *v = v.max(T::zero()));
        if mode == Mode::Train {
            self.mask = Some(x.data().iter().map(|&v| v > T::zero()).collect());
        }
        y
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let mask = self
            .mask
            .as_ref()
            .expect("relu backward without a train-mode forward");
        let mut dx = dy.clone();
        for (v, &keep) in dx.data_mut().iter_mut().zip(mask) {
            if !keep {
                *v = T::zero();
            }
        }
        dx
    }
}

/// Inverted dropout: train mode zeroes each element with probability
/// `rate` and scales survivors by 1/(1-rate); eval mode is the identity.
pub struct Dropout<T> {
    pub rate: f64,
    mask: Option<Vec<T>>,
}

impl<T: Scalar> Dropout<T> {
    pub fn new(rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::BadDropoutRate(rate));
        }
        Ok(Dropout { rate, mask: None })
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode, rng: &mut RngState) -> Tensor<T> {
        if mode != Mode::Train || self.rate == 0.0 {
            if mode == Mode::Train {
                self.mask = None; // rate 0: backward is identity
            }
            return x.clone();
        }
        let keep_scale = T::from_f64(1.0 / (1.0 - self.rate));
        let mask: Vec<T> = x
            .data()
            .iter()
            .map(|_| {
                if rng.uniform() < self.rate {
                    T::zero()
                } else {
                    keep_scale
                }
            })
            .collect();
        let mut y = x.clone();
        for (v, &m) in y.data_mut().iter_mut().zip(&mask) {
            *v *= m;
        }
        self.mask = Some(mask);
        y
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        match &self.mask {
            None => dy.clone(),
            Some(mask) => {
                let mut dx = dy.clone();
                for (v, &m) in dx.data_mut().iter_mut().zip(mask) {
                    *v *= m;
                }
                dx
            }
        }
    }
}
