//! Training and evaluation over encoded sequence images.

use std::time::Instant;

use crate::checkpoint;
use crate::encode::encode_image;
use crate::error::{Error, Result};
use crate::image::{augment_set, resize, ColorImage, CROP_SIZE, CROP_SOURCE};
use crate::layout::PartLayout;
use crate::network::{Network, NetworkSpec, INPUT_SIZE};
use crate::nn::{softmax, softmax_cross_entropy_ids, Mode};
use crate::optim::{LrSchedule, SgdState};
use crate::rng::RngState;
use crate::skeleton::Topology;
use crate::synth::synth_sequence;
use crate::tensor::Tensor;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub depth: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub schedule: LrSchedule,
    pub momentum: f64,
    pub weight_decay: f64,
    pub seed: u64,
    /// Expand each training image into 24 crop/flip variants.
    pub augment: bool,
}

/// Depth 110 trains with half the usual batch.
pub fn default_batch_for_depth(depth: usize) -> usize {
    if depth == 110 {
        64
    } else {
        128
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            depth: 20,
            epochs: 120,
            batch_size: 128,
            schedule: LrSchedule::default(),
            momentum: 0.9,
            weight_decay: 1e-4,
            seed: 0,
            augment: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::BatchTooSmall);
        }
        if self.epochs == 0 {
            return Err(Error::BadConfig("epochs must be positive".into()));
        }
        NetworkSpec::new(self.depth, 2).map(|_| ())
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub train_err: f64,
    pub test_err: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    /// 1-based epoch whose weights were kept (lowest test error; ties go
    /// to the epoch with the lower training loss).
    pub best_epoch: usize,
    pub best_test_err: f64,
    pub train_samples: usize,
    pub test_samples: usize,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,lr,train_loss,train_err,test_err\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.epoch, e.lr, e.train_loss, e.train_err, e.test_err
            ));
        }
        out
    }
}

/// One classifier-ready example: 3x32x32 unit-scaled pixels plus label.
#[derive(Debug, Clone)]
pub struct Sample {
    pub pixels: Vec<f32>,
    pub label: u32,
}

/// Training-set preparation. With augmentation each image is resized to
/// 40x40 and expanded into its 24 crop/flip variants; without, it is
/// resized straight to 32x32.
pub fn prepare_train_samples(images: &[(ColorImage, u32)], augment: bool) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for (img, label) in images {
        if augment {
            let big = resize(img, CROP_SOURCE, CROP_SOURCE)?;
            for v in augment_set(&big)? {
                out.push(Sample {
                    pixels: v.to_chw_f32(),
                    label: *label,
                });
            }
        } else {
            let small = resize(img, CROP_SIZE, CROP_SIZE)?;
            out.push(Sample {
                pixels: small.to_chw_f32(),
                label: *label,
            });
        }
    }
    Ok(out)
}

/// Evaluation images are plainly resized, never cropped or flipped.
pub fn prepare_eval_samples(images: &[(ColorImage, u32)]) -> Result<Vec<Sample>> {
    prepare_train_samples(images, false)
}

fn batch_tensor(samples: &[Sample], indices: &[usize]) -> (Tensor<f32>, Vec<u32>) {
    let plane = 3 * INPUT_SIZE * INPUT_SIZE;
    let mut data = Vec::with_capacity(indices.len() * plane);
    let mut labels = Vec::with_capacity(indices.len());
    for &i in indices {
        data.extend_from_slice(&samples[i].pixels);
        labels.push(samples[i].label);
    }
    (
        Tensor::from_vec(&[indices.len(), 3, INPUT_SIZE, INPUT_SIZE], data),
        labels,
    )
}

/// Predicted class per sample: argmax of the logits, lowest index on ties.
pub fn argmax_rows(logits: &Tensor<f32>) -> Vec<u32> {
    let (n, c) = logits.dims2();
    (0..n)
        .map(|i| {
            let row = &logits.data()[i * c..(i + 1) * c];
            let mut best = 0usize;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best as u32
        })
        .collect()
}

/// Fraction of misclassified samples.
pub fn evaluate(net: &mut Network<f32>, samples: &[Sample], batch_size: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySplit);
    }
    let mut rng = RngState::seed_from(0); // unused in eval mode
    let mut wrong = 0usize;
    let all: Vec<usize> = (0..samples.len()).collect();
    for chunk in all.chunks(batch_size.max(1)) {
        let (x, labels) = batch_tensor(samples, chunk);
        let logits = net.forward(&x, Mode::Eval, &mut rng)?;
        for (pred, want) in argmax_rows(&logits).into_iter().zip(labels) {
            if pred != want {
                wrong += 1;
            }
        }
    }
    Ok(wrong as f64 / samples.len() as f64)
}

/// Re-estimate batch norm running statistics from dropout-free passes
/// over `samples` (averaged across batches). Training collects those
/// statistics with dropout active, which inflates the recorded variance
/// relative to what eval-mode activations actually exhibit; without this
/// step eval accuracy lags far behind the training forward pass.
pub fn calibrate(net: &mut Network<f32>, samples: &[Sample], batch_size: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptySplit);
    }
    let mut rng = RngState::seed_from(0); // dropout is inactive in this mode
    net.begin_calibration();
    let all: Vec<usize> = (0..samples.len()).collect();
    for chunk in all.chunks(batch_size.max(1)) {
        let (x, _) = batch_tensor(samples, chunk);
        net.forward(&x, Mode::Calibrate, &mut rng)?;
    }
    Ok(())
}

/// Class probabilities for one prepared sample.
pub fn predict_probs(net: &mut Network<f32>, sample: &Sample) -> Result<Vec<f32>> {
    let mut rng = RngState::seed_from(0);
    let x = Tensor::from_vec(&[1, 3, INPUT_SIZE, INPUT_SIZE], sample.pixels.clone());
    let logits = net.forward(&x, Mode::Eval, &mut rng)?;
    Ok(softmax(&logits).into_data())
}

pub struct TrainOutcome {
    /// Network restored to its best epoch's weights.
    pub network: Network<f32>,
    pub report: TrainReport,
}

/// Full training run. `on_epoch` fires after each epoch's evaluation and
/// may be used for logging; pass `|_| {}` to ignore.
pub fn train(
    train_samples: &[Sample],
    test_samples: &[Sample],
    num_classes: usize,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_samples.is_empty() || test_samples.is_empty() {
        return Err(Error::EmptySplit);
    }
    let spec = NetworkSpec::new(cfg.depth, num_classes)?;
    let master = RngState::seed_from(cfg.seed);
    let mut init_rng = master.fork(1);
    let mut shuffle_rng = master.fork(2);
    let mut dropout_rng = master.fork(3);

    let mut net = Network::build(spec, &mut init_rng)?;
    let mut sgd = SgdState::new(&mut net);

    let mut order: Vec<usize> = (0..train_samples.len()).collect();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    // (epoch, test_err, train_loss, checkpoint bytes)
    let mut best: Option<(usize, f64, f64, Vec<u8>)> = None;

    for epoch in 1..=cfg.epochs {
        let lr = cfg.schedule.lr_at(epoch, cfg.epochs)?;
        shuffle_rng.shuffle(&mut order);

        let mut loss_sum = 0.0f64;
        let mut seen = 0usize;
        let mut wrong = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            if chunk.len() < 2 {
                continue; // batch statistics need at least two samples
            }
            let (x, labels) = batch_tensor(train_samples, chunk);
            let logits = net.forward(&x, Mode::Train, &mut dropout_rng)?;
            let (loss, grad) = softmax_cross_entropy_ids(&logits, &labels)?;
            for (pred, &want) in argmax_rows(&logits).into_iter().zip(&labels) {
                if pred != want {
                    wrong += 1;
                }
            }
            net.zero_grad();
            net.backward(&grad)?;
            sgd.step(&mut net, lr, cfg.momentum, cfg.weight_decay)?;
            loss_sum += loss as f64 * chunk.len() as f64;
            seen += chunk.len();
        }
        if seen == 0 {
            return Err(Error::BatchTooSmall);
        }

        calibrate(&mut net, train_samples, cfg.batch_size)?;
        let test_err = evaluate(&mut net, test_samples, cfg.batch_size)?;
        let stats = EpochStats {
            epoch,
            lr,
            train_loss: loss_sum / seen as f64,
            train_err: wrong as f64 / seen as f64,
            test_err,
        };
        on_epoch(&stats);
        let improved = best.as_ref().map_or(true, |(_, e, l, _)| {
            test_err < *e || (test_err == *e && stats.train_loss < *l)
        });
        if improved {
            let bytes = checkpoint::save_bytes(
                &mut net,
                checkpoint::CheckpointMeta {
                    epoch: epoch as u32,
                    seed: cfg.seed,
                    joint_count: 0,
                },
            )?;
            best = Some((epoch, test_err, stats.train_loss, bytes));
        }
        epochs.push(stats);
    }

    let (best_epoch, best_test_err, _, bytes) = best.expect("at least one epoch ran");
    let (network, _) = checkpoint::load_bytes(&bytes)?;
    Ok(TrainOutcome {
        network,
        report: TrainReport {
            epochs,
            best_epoch,
            best_test_err,
            train_samples: train_samples.len(),
            test_samples: test_samples.len(),
        },
    })
}

/// Mean and variance of per-sequence wall time, in milliseconds.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StageTiming {
    pub mean_ms: f64,
    pub variance_ms2: f64,
}

fn stage_timing(ms: &[f64]) -> StageTiming {
    let n = ms.len() as f64;
    let mean = ms.iter().sum::<f64>() / n;
    let variance = ms.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    StageTiming {
        mean_ms: mean,
        variance_ms2: variance,
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct StageTimings {
    /// Raw sequence -> color image.
    pub stage_a: StageTiming,
    /// One optimizer step, amortized per sequence.
    pub stage_b: StageTiming,
    /// End-to-end prediction: encode + resize + eval forward.
    pub stage_c: StageTiming,
    pub depth: usize,
    pub frames: usize,
    pub joints: usize,
    pub runs: usize,
}

/// Wall-clock the three pipeline stages on synthetic sequences.
pub fn timeit_stages(
    depth: usize,
    topology: Topology,
    frames: usize,
    runs: usize,
) -> Result<StageTimings> {
    if runs == 0 {
        return Err(Error::BadConfig("runs must be positive".into()));
    }
    let layout = PartLayout::for_topology(topology);
    let mut rng = RngState::seed_from(42);
    let seq = synth_sequence(topology, 0, frames, &mut rng);

    let img = encode_image(&seq, &layout)?; // warm-up
    let mut a_times = Vec::with_capacity(runs);
    for _ in 0..runs {
        let t = Instant::now();
        let _ = encode_image(&seq, &layout)?;
        a_times.push(t.elapsed().as_secs_f64() * 1e3);
    }

    let spec = NetworkSpec::new(depth, 8)?;
    let mut net = Network::<f32>::build(spec, &mut rng)?;

    // Stage B: one training step on a small batch, cost split per sequence.
    const TRAIN_BATCH: usize = 4;
    let small = resize(&img, INPUT_SIZE, INPUT_SIZE)?;
    let pixels = small.to_chw_f32();
    let mut batch_data = Vec::with_capacity(TRAIN_BATCH * pixels.len());
    for _ in 0..TRAIN_BATCH {
        batch_data.extend_from_slice(&pixels);
    }
    let xb = Tensor::from_vec(&[TRAIN_BATCH, 3, INPUT_SIZE, INPUT_SIZE], batch_data);
    let labels = vec![0u32; TRAIN_BATCH];
    let mut sgd = SgdState::new(&mut net);
    let mut train_rng = RngState::seed_from(7);
    let mut b_times = Vec::with_capacity(runs);
    for _ in 0..runs {
        let t = Instant::now();
        let logits = net.forward(&xb, Mode::Train, &mut train_rng)?;
        let (_, grad) = softmax_cross_entropy_ids(&logits, &labels)?;
        net.zero_grad();
        net.backward(&grad)?;
        sgd.step(&mut net, 1e-4, 0.9, 1e-4)?;
        b_times.push(t.elapsed().as_secs_f64() * 1e3 / TRAIN_BATCH as f64);
    }

    let mut eval_rng = RngState::seed_from(0);
    let warm = Tensor::from_vec(&[1, 3, INPUT_SIZE, INPUT_SIZE], pixels.clone());
    net.forward(&warm, Mode::Eval, &mut eval_rng)?; // warm-up
    let mut c_times = Vec::with_capacity(runs);
    for _ in 0..runs {
        let t = Instant::now();
        let img = encode_image(&seq, &layout)?;
        let small = resize(&img, INPUT_SIZE, INPUT_SIZE)?;
        let x = Tensor::from_vec(&[1, 3, INPUT_SIZE, INPUT_SIZE], small.to_chw_f32());
        net.forward(&x, Mode::Eval, &mut eval_rng)?;
        c_times.push(t.elapsed().as_secs_f64() * 1e3);
    }

    Ok(StageTimings {
        stage_a: stage_timing(&a_times),
        stage_b: stage_timing(&b_times),
        stage_c: stage_timing(&c_times),
        depth,
        frames,
        joints: topology.joint_count(),
        runs,
    })
}
