//! 2D convolution (cross-correlation, no kernel flip) via im2col + GEMM.

use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::tensor::{gemm_nn, gemm_nt, gemm_tn, Param, Scalar, Tensor};

use super::Mode;

pub struct Conv2d<T> {
    /// (out_channels, in_channels, k, k)
    pub weight: Param<T>,
    pub stride: usize,
    pub padding: usize,
    cached_input: Option<Tensor<T>>,
}

#[inline]
fn out_dim(size: usize, pad: usize, k: usize, stride: usize) -> usize {
    (size + 2 * pad - k) / stride + 1
}

/// Unpack one image (C, H, W) into columns (C*k*k, oh*ow).
fn im2col<T: Scalar>(
    x: &[T],
    c: usize,
    h: usize,
    w: usize,
    k: usize,
    stride: usize,
    pad: usize,
    col: &mut [T],
) {
    let oh = out_dim(h, pad, k, stride);
    let ow = out_dim(w, pad, k, stride);
    debug_assert_eq!(col.len(), c * k * k * oh * ow);
    let mut row = 0;
    for ci in 0..c {
        let plane = &x[ci * h * w..(ci + 1) * h * w];
        for ky in 0..k {
            for kx in 0..k {
                let dst = &mut col[row * oh * ow..(row + 1) * oh * ow];
                for oy in 0..oh {
                    let iy = (oy * stride + ky) as isize - pad as isize;
                    let dst_row = &mut dst[oy * ow..(oy + 1) * ow];
                    if iy < 0 || iy >= h as isize {
                        dst_row.iter_mut().for_each(|v| *v = T::zero());
                        continue;
                    }
                    let src_row = &plane[iy as usize * w..(iy as usize + 1) * w];
                    for (ox, v) in dst_row.iter_mut().enumerate() {
                        let ix = (ox * stride + kx) as isize - pad as isize;
                        *v = if ix < 0 || ix >= w as isize {
                            T::zero()
                        } else {
                            src_row[ix as usize]
                        };
                    }
                }
                row += 1;
            }
        }
    }
}

/// Scatter-add columns back into an image; inverse layout of `im2col`.
fn col2im<T: Scalar>(
    col: &[T],
    c: usize,
    h: usize,
    w: usize,
    k: usize,
    stride: usize,
    pad: usize,
    x: &mut [T],
) {
    let oh = out_dim(h, pad, k, stride);
    let ow = out_dim(w, pad, k, stride);
    let mut row = 0;
    for ci in 0..c {
        let plane = &mut x[ci * h * w..(ci + 1) * h * w];
        for ky in 0..k {
            for kx in 0..k {
                let src = &col[row * oh * ow..(row + 1) * oh * ow];
                for oy in 0..oh {
                    let iy = (oy * stride + ky) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let dst_row = &mut plane[iy as usize * w..(iy as usize + 1) * w];
                    for ox in 0..ow {
                        let ix = (ox * stride + kx) as isize - pad as isize;
                        if ix >= 0 && ix < w as isize {
                            dst_row[ix as usize] += src[oy * ow + ox];
                        }
                    }
                }
                row += 1;
            }
        }
    }
}

impl<T: Scalar> Conv2d<T> {
    /// He-initialized convolution; no bias (every conv here feeds a BN).
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        k: usize,
        stride: usize,
        padding: usize,
        rng: &mut RngState,
    ) -> Self {
        let fan_in = in_channels * k * k;
        let std = (2.0 / fan_in as f64).sqrt();
        let data = (0..out_channels * fan_in)
            .map(|_| T::from_f64(rng.normal() * std))
            .collect();
        Conv2d {
            weight: Param::new(Tensor::from_vec(&[out_channels, in_channels, k, k], data)),
            stride,
            padding,
            cached_input: None,
        }
    }

    pub fn kernel(&self) -> usize {
        self.weight.value.shape()[2]
    }

    pub fn out_channels(&self) -> usize {
        self.weight.value.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weight.value.shape()[1]
    }

    pub fn output_shape(&self, input: &[usize]) -> Vec<usize> {
        let k = self.kernel();
        vec![
            input[0],
            self.out_channels(),
            out_dim(input[2], self.padding, k, self.stride),
            out_dim(input[3], self.padding, k, self.stride),
        ]
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        let (n, c, h, w) = x.dims4();
        if c != self.in_channels() {
            return Err(Error::ShapeMismatch(format!(
                "conv expects {} input channels, got {c}",
                self.in_channels()
            )));
        }
        let k = self.kernel();
        let oc = self.out_channels();
        let oh = out_dim(h, self.padding, k, self.stride);
        let ow = out_dim(w, self.padding, k, self.stride);
        let ckk = c * k * k;
        let mut col = vec![T::zero(); ckk * oh * ow];
        let mut y = Tensor::zeros(&[n, oc, oh, ow]);
        for i in 0..n {
            im2col(
                &x.data()[i * c * h * w..(i + 1) * c * h * w],
                c,
                h,
                w,
                k,
                self.stride,
                self.padding,
                &mut col,
            );
            gemm_nn(
                self.weight.value.data(),
                &col,
                &mut y.data_mut()[i * oc * oh * ow..(i + 1) * oc * oh * ow],
                oc,
                ckk,
                oh * ow,
            );
        }
        if mode == Mode::Train {
            self.cached_input = Some(x.clone());
        }
        Ok(y)
    }

    /// Accumulates the weight gradient and returns the input gradient.
    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let x = self
            .cached_input
            .as_ref()
            .expect("conv backward without a train-mode forward");
        let (n, c, h, w) = x.dims4();
        let k = self.kernel();
        let oc = self.out_channels();
        let (dn, doc, oh, ow) = dy.dims4();
        assert_eq!((dn, doc), (n, oc), "conv backward shape mismatch");
        let ckk = c * k * k;
        let mut col = vec![T::zero(); ckk * oh * ow];
        let mut dcol = vec![T::zero(); ckk * oh * ow];
        let mut dx = Tensor::zeros(&[n, c, h, w]);
        for i in 0..n {
            im2col(
                &x.data()[i * c * h * w..(i + 1) * c * h * w],
                c,
                h,
                w,
                k,
                self.stride,
                self.padding,
                &mut col,
            );
            let dy_i = &dy.data()[i * oc * oh * ow..(i + 1) * oc * oh * ow];
            // dW += dY_i (oc x ohw) * col^T (ohw x ckk)
            gemm_nt(dy_i, &col, self.weight.grad.data_mut(), oc, oh * ow, ckk);
            // dcol = W^T (ckk x oc) * dY_i (oc x ohw)
            dcol.iter_mut().for_each(|v| *v = T::zero());
            gemm_tn(self.weight.value.data(), dy_i, &mut dcol, oc, ckk, oh * ow);
            col2im(
                &dcol,
                c,
                h,
                w,
                k,
                self.stride,
                self.padding,
                &mut dx.data_mut()[i * c * h * w..(i + 1) * c * h * w],
            );
        }
        dx
    }
}
