//! SGD with momentum and decoupled-from-BN weight decay, plus the
//! three-plateau learning rate schedule.

use crate::error::{Error, Result};
use crate::network::{Network, StateMut};
use crate::tensor::Scalar;

/// Learning rate plateaus: `rates[i]` applies from epoch `starts[i]`
/// (1-based, inclusive) until the next boundary.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LrSchedule {
    pub rates: [f64; 3],
    /// 1-based first epochs of the second and third plateau.
    pub boundaries: [usize; 2],
}

impl Default for LrSchedule {
    /// 0.01 until epoch 74, 0.001 at epoch 75, 0.0001 from epoch 76
    /// (the last 45 of 120 epochs).
    fn default() -> Self {
        LrSchedule {
            rates: [0.01, 0.001, 0.0001],
            boundaries: [75, 76],
        }
    }
}

impl LrSchedule {
    pub fn lr_at(&self, epoch: usize, total_epochs: usize) -> Result<f64> {
        if epoch < 1 || epoch > total_epochs {
            return Err(Error::BadConfig(format!(
                "epoch {epoch} outside [1, {total_epochs}]"
            )));
        }
        Ok(if epoch >= self.boundaries[1] {
            self.rates[2]
        } else if epoch >= self.boundaries[0] {
            self.rates[1]
        } else {
            self.rates[0]
        })
    }
}

/// Per-parameter velocity buffers, in network state order.
pub struct SgdState<T> {
    velocities: Vec<Vec<T>>,
}

impl<T: Scalar> SgdState<T> {
    pub fn new(net: &mut Network<T>) -> Self {
        let velocities = net
            .state_mut()
            .into_iter()
            .filter_map(|s| match s {
                StateMut::Param { param, .. } => Some(vec![T::zero(); param.value.numel()]),
                StateMut::Buffer { .. } => None,
            })
            .collect();
        SgdState { velocities }
    }

    /// v <- momentum * v + grad + weight_decay * param;
    /// param <- param - lr * v. Decay applies to conv/FC weights only.
    pub fn step(
        &mut self,
        net: &mut Network<T>,
        lr: f64,
        momentum: f64,
        weight_decay: f64,
    ) -> Result<()> {
        let lr = T::from_f64(lr);
        let momentum = T::from_f64(momentum);
        let wd = T::from_f64(weight_decay);
        let params: Vec<(bool, &mut crate::tensor::Param<T>)> = net
            .state_mut()
            .into_iter()
            .filter_map(|s| match s {
                StateMut::Param { decay, param, .. } => Some((decay, param)),
                StateMut::Buffer { .. } => None,
            })
            .collect();
        if params.len() != self.velocities.len() {
            return Err(Error::ShapeMismatch(
                "optimizer state does not match network parameters".into(),
            ));
        }
        for ((decay, param), vel) in params.into_iter().zip(&mut self.velocities) {
            if vel.len() != param.value.numel() {
                return Err(Error::ShapeMismatch(
                    "velocity buffer does not match parameter shape".into(),
                ));
            }
            let wd_here = if decay { wd } else { T::zero() };
            for ((v, p), &g) in vel
                .iter_mut()
                .zip(param.value.data_mut().iter_mut())
                .zip(param.grad.data().iter())
            {
                *v = momentum * *v + g + wd_here * *p;
                *p = *p - lr * *v;
            }
        }
        Ok(())
    }
}
