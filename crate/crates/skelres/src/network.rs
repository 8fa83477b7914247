//! Residual network construction and execution.
//!
//! Architecture family: a 3x3/16 stem (conv, batch norm, ReLU), three
//! stages of identical residual units at widths 16/32/64, global mean
//! pooling and a fully connected classifier. Each unit computes
//! `relu(F(x) + shortcut(x))` with F = conv-BN-ReLU-dropout-conv-BN.
//! The first unit of stages two and three downsamples with a stride-2
//! first conv and a 1x1 stride-2 projection shortcut.

use crate::error::{Error, Result};
use crate::nn::{BatchNorm2d, Conv2d, Dropout, GlobalMeanPool, Linear, Mode, Relu};
use crate::rng::RngState;
use crate::tensor::{Param, Scalar, Tensor};

pub const SUPPORTED_DEPTHS: [usize; 5] = [20, 32, 44, 56, 110];
pub const STAGE_WIDTHS: [usize; 3] = [16, 32, 64];
pub const INPUT_SIZE: usize = 32;
pub const DROPOUT_RATE: f64 = 0.5;

/// Declarative description of one network in the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NetworkSpec {
    pub depth: usize,
    pub num_classes: usize,
}

impl NetworkSpec {
    pub fn new(depth: usize, num_classes: usize) -> Result<Self> {
        if !SUPPORTED_DEPTHS.contains(&depth) {
            return Err(Error::UnsupportedDepth(depth));
        }
        if num_classes < 2 {
            return Err(Error::BadConfig(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        Ok(NetworkSpec { depth, num_classes })
    }

    /// Residual units per stage: (depth - 2) / 6.
    pub fn units_per_stage(&self) -> usize {
        (self.depth - 2) / 6
    }

    pub fn total_units(&self) -> usize {
        3 * self.units_per_stage()
    }
}

struct ResidualUnit<T> {
    conv1: Conv2d<T>,
    bn1: BatchNorm2d<T>,
    relu1: Relu<T>,
    dropout: Dropout<T>,
    conv2: Conv2d<T>,
    bn2: BatchNorm2d<T>,
    projection: Option<(Conv2d<T>, BatchNorm2d<T>)>,
    relu_out: Relu<T>,
}

impl<T: Scalar> ResidualUnit<T> {
    fn new(in_c: usize, out_c: usize, stride: usize, rng: &mut RngState) -> Self {
        let projection = if in_c != out_c || stride != 1 {
            Some((
                Conv2d::new(in_c, out_c, 1, stride, 0, rng),
                BatchNorm2d::new(out_c),
            ))
        } else {
            None
        };
        ResidualUnit {
            conv1: Conv2d::new(in_c, out_c, 3, stride, 1, rng),
            bn1: BatchNorm2d::new(out_c),
            relu1: Relu::new(),
            dropout: Dropout::new(DROPOUT_RATE).expect("fixed rate is valid"),
            conv2: Conv2d::new(out_c, out_c, 3, 1, 1, rng),
            bn2: BatchNorm2d::new(out_c),
            projection,
            relu_out: Relu::new(),
        }
    }

    fn forward(&mut self, x: &Tensor<T>, mode: Mode, rng: &mut RngState) -> Result<Tensor<T>> {
        let mut f = self.conv1.forward(x, mode)?;
        f = self.bn1.forward(&f, mode)?;
        f = self.relu1.forward(&f, mode);
        f = self.dropout.forward(&f, mode, rng);
        f = self.conv2.forward(&f, mode)?;
        f = self.bn2.forward(&f, mode)?;
        let shortcut = match &mut self.projection {
            Some((conv, bn)) => {
                let s = conv.forward(x, mode)?;
                bn.forward(&s, mode)?
            }
            None => x.clone(),
        };
        let mut sum = f;
        for (v, &s) in sum.data_mut().iter_mut().zip(shortcut.data()) {
            *v += s;
        }
        Ok(self.relu_out.forward(&sum, mode))
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let dsum = self.relu_out.backward(dy);
        // Residual branch.
        let mut d = self.bn2.backward(&dsum);
        d = self.conv2.backward(&d);
        d = self.dropout.backward(&d);
        d = self.relu1.backward(&d);
        d = self.bn1.backward(&d);
        let mut dx = self.conv1.backward(&d);
        // Shortcut branch.
        match &mut self.projection {
            Some((conv, bn)) => {
                let ds = bn.backward(&dsum);
                let ds = conv.backward(&ds);
                for (v, &s) in dx.data_mut().iter_mut().zip(ds.data()) {
                    *v += s;
                }
            }
            None => {
                for (v, &s) in dx.data_mut().iter_mut().zip(dsum.data()) {
                    *v += s;
                }
            }
        }
        dx
    }
}

/// One mutable piece of network state, for optimizers and checkpoints.
pub enum StateMut<'a, T> {
    /// Learnable parameter; `decay` marks it as subject to weight decay
    /// (conv and FC weights only).
    Param {
        name: String,
        decay: bool,
        param: &'a mut Param<T>,
    },
    /// Non-learnable buffer (batch norm running statistics).
    Buffer { name: String, buf: &'a mut Vec<T> },
}

pub struct Network<T> {
    spec: NetworkSpec,
    input_size: usize,
    input_channels: usize,
    stem_conv: Conv2d<T>,
    stem_bn: BatchNorm2d<T>,
    stem_relu: Relu<T>,
    units: Vec<ResidualUnit<T>>,
    /// (stage width, stride) of each unit, in order; fixed by the spec.
    unit_plan: Vec<(usize, usize)>,
    pool: GlobalMeanPool,
    fc: Linear<T>,
    train_ready: bool,
}

fn unit_plan(widths: &[usize], units_per_stage: usize) -> Vec<(usize, usize)> {
    let mut plan = Vec::new();
    for (si, &w) in widths.iter().enumerate() {
        for ui in 0..units_per_stage {
            let stride = if si > 0 && ui == 0 { 2 } else { 1 };
            plan.push((w, stride));
        }
    }
    plan
}

impl<T: Scalar> Network<T> {
    /// Build one of the five standard depths for 3-channel 32x32 inputs.
    pub fn build(spec: NetworkSpec, rng: &mut RngState) -> Result<Self> {
        NetworkSpec::new(spec.depth, spec.num_classes)?;
        Ok(Self::assemble(
            spec,
            3,
            INPUT_SIZE,
            &STAGE_WIDTHS,
            spec.units_per_stage(),
            rng,
        ))
    }

    /// Test-scale miniature with the same block structure: a stem, one
    /// identity-shortcut unit and one projection unit, on 8x8 inputs.
    pub fn micro(num_classes: usize, rng: &mut RngState) -> Self {
        let spec = NetworkSpec {
            depth: 0,
            num_classes,
        };
        Self::assemble(spec, 3, 8, &[4, 8], 1, rng)
    }

    fn assemble(
        spec: NetworkSpec,
        input_channels: usize,
        input_size: usize,
        widths: &[usize],
        units_per_stage: usize,
        rng: &mut RngState,
    ) -> Self {
        let stem_width = widths[0];
        let plan = unit_plan(widths, units_per_stage);
        let stem_conv = Conv2d::new(input_channels, stem_width, 3, 1, 1, rng);
        let mut units = Vec::with_capacity(plan.len());
        let mut in_c = stem_width;
        for &(w, stride) in &plan {
            units.push(ResidualUnit::new(in_c, w, stride, rng));
            in_c = w;
        }
        let fc = Linear::new(in_c, spec.num_classes, rng);
        Network {
            spec,
            input_size,
            input_channels,
            stem_conv,
            stem_bn: BatchNorm2d::new(stem_width),
            stem_relu: Relu::new(),
            units,
            unit_plan: plan,
            pool: GlobalMeanPool::new(),
            fc,
            train_ready: false,
        }
    }

    pub fn spec(&self) -> NetworkSpec {
        self.spec
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    /// (width, stride) of each residual unit in order.
    pub fn unit_plan(&self) -> &[(usize, usize)] {
        &self.unit_plan
    }

    /// Replace the dropout rate in every residual unit (0 disables it;
    /// useful for deterministic optimization diagnostics).
    pub fn set_dropout_rate(&mut self, rate: f64) -> Result<()> {
        for unit in &mut self.units {
            unit.dropout = Dropout::new(rate)?;
        }
        Ok(())
    }

    /// Reset every batch norm layer's calibration average; follow with one
    /// or more `Mode::Calibrate` forward passes over training batches to
    /// re-estimate the running statistics without dropout noise.
    pub fn begin_calibration(&mut self) {
        self.stem_bn.reset_calibration();
        for unit in &mut self.units {
            unit.bn1.reset_calibration();
            unit.bn2.reset_calibration();
            if let Some((_, bn)) = &mut unit.projection {
                bn.reset_calibration();
            }
        }
    }

    /// Logits for a batch of (N, C, S, S) images.
    pub fn forward(&mut self, batch: &Tensor<T>, mode: Mode, rng: &mut RngState) -> Result<Tensor<T>> {
        let (_, c, h, w) = batch.dims4();
        if c != self.input_channels || h != self.input_size || w != self.input_size {
            return Err(Error::ShapeMismatch(format!(
                "expected (N, {}, {}, {}) input, got (N, {c}, {h}, {w})",
                self.input_channels, self.input_size, self.input_size
            )));
        }
        let mut x = self.stem_conv.forward(batch, mode)?;
        x = self.stem_bn.forward(&x, mode)?;
        x = self.stem_relu.forward(&x, mode);
        for unit in &mut self.units {
            x = unit.forward(&x, mode, rng)?;
        }
        let pooled = self.pool.forward(&x, mode);
        let logits = self.fc.forward(&pooled, mode)?;
        if mode == Mode::Train {
            self.train_ready = true;
        }
        Ok(logits)
    }

    /// Backpropagate a logits gradient, accumulating parameter gradients.
    pub fn backward(&mut self, loss_grad: &Tensor<T>) -> Result<()> {
        if !self.train_ready {
            return Err(Error::BadConfig(
                "backward called without a preceding train-mode forward".into(),
            ));
        }
        let mut d = self.fc.backward(loss_grad);
        d = self.pool.backward(&d);
        for unit in self.units.iter_mut().rev() {
            d = unit.backward(&d);
        }
        d = self.stem_relu.backward(&d);
        d = self.stem_bn.backward(&d);
        self.stem_conv.backward(&d);
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        for slot in self.state_mut() {
            if let StateMut::Param { param, .. } = slot {
                param.zero_grad();
            }
        }
    }

    /// All mutable state in a fixed, documented order: stem, units in
    /// sequence (residual branch then projection), classifier. Checkpoint
    /// layout and optimizer velocity slots both follow this order.
    pub fn state_mut(&mut self) -> Vec<StateMut<'_, T>> {
        fn bn_state<'a, T: Scalar>(
            prefix: &str,
            bn: &'a mut BatchNorm2d<T>,
            out: &mut Vec<StateMut<'a, T>>,
        ) {
            out.push(StateMut::Param {
                name: format!("{prefix}.gamma"),
                decay: false,
                param: &mut bn.gamma,
            });
            out.push(StateMut::Param {
                name: format!("{prefix}.beta"),
                decay: false,
                param: &mut bn.beta,
            });
            out.push(StateMut::Buffer {
                name: format!("{prefix}.running_mean"),
                buf: &mut bn.running_mean,
            });
            out.push(StateMut::Buffer {
                name: format!("{prefix}.running_var"),
                buf: &mut bn.running_var,
            });
        }

        let mut out = Vec::new();
        out.push(StateMut::Param {
            name: "stem.conv.weight".into(),
            decay: true,
            param: &mut self.stem_conv.weight,
        });
        bn_state("stem.bn", &mut self.stem_bn, &mut out);
        for (i, unit) in self.units.iter_mut().enumerate() {
            out.push(StateMut::Param {
                name: format!("unit{i}.conv1.weight"),
                decay: true,
                param: &mut unit.conv1.weight,
            });
            bn_state(&format!("unit{i}.bn1"), &mut unit.bn1, &mut out);
            out.push(StateMut::Param {
                name: format!("unit{i}.conv2.weight"),
                decay: true,
                param: &mut unit.conv2.weight,
            });
            bn_state(&format!("unit{i}.bn2"), &mut unit.bn2, &mut out);
            if let Some((conv, bn)) = &mut unit.projection {
                out.push(StateMut::Param {
                    name: format!("unit{i}.proj.weight"),
                    decay: true,
                    param: &mut conv.weight,
                });
                bn_state(&format!("unit{i}.proj_bn"), bn, &mut out);
            }
        }
        out.push(StateMut::Param {
            name: "fc.weight".into(),
            decay: true,
            param: &mut self.fc.weight,
        });
        out.push(StateMut::Param {
            name: "fc.bias".into(),
            decay: false,
            param: &mut self.fc.bias,
        });
        out
    }

    /// Force the residual branch's final BN scale to zero everywhere;
    /// turns every identity-shortcut unit into plain ReLU(x).
    pub fn zero_residual_branches(&mut self) {
        for unit in &mut self.units {
            unit.bn2.gamma.value.fill(T::zero());
            unit.bn2.beta.value.fill(T::zero());
        }
    }
}

/// Shapes of every learnable parameter of a standard-depth network, in
/// checkpoint order. Derived from the spec alone, without building a net.
pub fn parameter_inventory(spec: &NetworkSpec) -> Result<Vec<(String, Vec<usize>)>> {
    NetworkSpec::new(spec.depth, spec.num_classes)?;
    let mut inv: Vec<(String, Vec<usize>)> = Vec::new();
    let bn = |prefix: &str, c: usize, inv: &mut Vec<(String, Vec<usize>)>| {
        inv.push((format!("{prefix}.gamma"), vec![c]));
        inv.push((format!("{prefix}.beta"), vec![c]));
    };
    inv.push(("stem.conv.weight".into(), vec![STAGE_WIDTHS[0], 3, 3, 3]));
    bn("stem.bn", STAGE_WIDTHS[0], &mut inv);
    let plan = unit_plan(&STAGE_WIDTHS, spec.units_per_stage());
    let mut in_c = STAGE_WIDTHS[0];
    for (i, &(w, stride)) in plan.iter().enumerate() {
        inv.push((format!("unit{i}.conv1.weight"), vec![w, in_c, 3, 3]));
        bn(&format!("unit{i}.bn1"), w, &mut inv);
        inv.push((format!("unit{i}.conv2.weight"), vec![w, w, 3, 3]));
        bn(&format!("unit{i}.bn2"), w, &mut inv);
        if in_c != w || stride != 1 {
            inv.push((format!("unit{i}.proj.weight"), vec![w, in_c, 1, 1]));
            bn(&format!("unit{i}.proj_bn"), w, &mut inv);
        }
        in_c = w;
    }
    inv.push(("fc.weight".into(), vec![spec.num_classes, in_c]));
    inv.push(("fc.bias".into(), vec![spec.num_classes]));
    Ok(inv)
}

/// Total learnable element count (weights, biases, BN scale/shift).
pub fn count_parameters(spec: &NetworkSpec) -> Result<usize> {
    Ok(parameter_inventory(spec)?
        .iter()
        .map(|(_, shape)| shape.iter().product::<usize>())
        .sum())
}

/// Text dump of the layer inventory, one line per listed layer.
pub fn describe(spec: &NetworkSpec) -> Result<String> {
    NetworkSpec::new(spec.depth, spec.num_classes)?;
    let mut out = String::new();
    out.push_str("3x3 conv, 16 filters, batch norm, relu\n");
    for &w in STAGE_WIDTHS.iter() {
        for _ in 0..spec.units_per_stage() {
            out.push_str(&format!(
                "residual unit: conv-bn-relu-dropout-conv-bn, {w} filters, add, relu\n"
            ));
        }
    }
    out.push_str("global mean pooling\n");
    out.push_str(&format!("fc, {} units\n", spec.num_classes));
    out.push_str("softmax\n");
    Ok(out)
}
