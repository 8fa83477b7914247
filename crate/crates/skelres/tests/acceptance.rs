//! Acceptance gate: one test per criterion, each printing a pass line.
//!
//! Criterion 8 needs the real MSR dataset and is skipped unless
//! `SKELRES_MSR_DIR` points at a directory of canonical sequence files.

use std::sync::OnceLock;

use skelres::encode::{encode_image, normalize, NormScope};
use skelres::gradcheck::{check_gradient, rel_err};
use skelres::image::{augment_set, flip, ColorImage, FlipAxis};
use skelres::layout::PartLayout;
use skelres::network::{
    count_parameters, Network, NetworkSpec, StateMut, INPUT_SIZE, STAGE_WIDTHS, SUPPORTED_DEPTHS,
};
use skelres::nn::{
    softmax_cross_entropy_ids, BatchNorm2d, Conv2d, Dropout, GlobalMeanPool, Linear, Mode, Relu,
};
use skelres::rng::RngState;
use skelres::skeleton::{Joint, SkeletonFrame, SkeletonSequence, Topology};
use skelres::synth::{synth_sequence, synth_set};
use skelres::tensor::Tensor;
use skelres::train::{
    evaluate, prepare_eval_samples, prepare_train_samples, timeit_stages, train, TrainConfig,
};

const GRAD_TOL: f64 = 1e-6;
const PROBES: usize = 20;

fn rand_tensor(shape: &[usize], rng: &mut RngState, lo: f64, hi: f64) -> Tensor<f64> {
    let n: usize = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.uniform_in(lo, hi)).collect())
}

/// Weighted sum of an output tensor; its gradient w.r.t. the output is
/// exactly the weights, which seeds every backward pass below.
fn weighted_sum(y: &Tensor<f64>, u: &[f64]) -> f64 {
    y.data().iter().zip(u).map(|(a, b)| a * b).sum()
}

fn assert_grad(name: &str, probe: usize, max_rel_err: f64) {
    assert!(
        max_rel_err < GRAD_TOL,
        "{name} probe {probe}: max relative error {max_rel_err:.3e} >= {GRAD_TOL:.0e}"
    );
}

#[test]
fn criterion_1_gradient_correctness() {
    let mut rng = RngState::seed_from(101);

    // Convolution: input and weight gradients against finite differences.
    for probe in 0..PROBES {
        let (n, ci, co) = (1 + probe % 2, 1 + probe % 3, 1 + (probe / 2) % 3);
        let (k, stride, pad) = ([1, 3][probe % 2], 1 + probe % 2, probe % 2);
        let (h, w) = (4 + probe % 3, 4 + (probe + 1) % 3);
        let x = rand_tensor(&[n, ci, h, w], &mut rng, -1.0, 1.0);
        let mut conv = Conv2d::<f64>::new(ci, co, k, stride, pad, &mut rng);
        let y = conv.forward(&x, Mode::Train).unwrap();
        let u: Vec<f64> = (0..y.numel()).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        conv.weight.zero_grad();
        let dx = conv.backward(&Tensor::from_vec(y.shape(), u.clone()));

        let w0 = conv.weight.value.data().to_vec();
        let r = check_gradient(x.data(), dx.data(), 1e-6, |xs| {
            let xt = Tensor::from_vec(x.shape(), xs.to_vec());
            weighted_sum(&conv.forward(&xt, Mode::Eval).unwrap(), &u)
        });
        assert_grad("conv dx", probe, r.max_rel_err);
        let wgrad = conv.weight.grad.data().to_vec();
        let r = check_gradient(&w0, &wgrad, 1e-6, |ws| {
            conv.weight.value.data_mut().copy_from_slice(ws);
            weighted_sum(&conv.forward(&x, Mode::Eval).unwrap(), &u)
        });
        conv.weight.value.data_mut().copy_from_slice(&w0);
        assert_grad("conv dW", probe, r.max_rel_err);
    }

    // Batch normalization in train mode: input, gamma, and beta gradients.
    for probe in 0..PROBES {
        let (n, c, h, w) = (2 + probe % 3, 1 + probe % 3, 2 + probe % 2, 2);
        let x = rand_tensor(&[n, c, h, w], &mut rng, -2.0, 2.0);
        let mut bn = BatchNorm2d::<f64>::new(c);
        for v in bn.gamma.value.data_mut() {
            *v = rng.uniform_in(0.5, 1.5);
        }
        for v in bn.beta.value.data_mut() {
            *v = rng.uniform_in(-0.5, 0.5);
        }
        let y = bn.forward(&x, Mode::Train).unwrap();
        let u: Vec<f64> = (0..y.numel()).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        bn.gamma.zero_grad();
        bn.beta.zero_grad();
        let dx = bn.backward(&Tensor::from_vec(y.shape(), u.clone()));

        let r = check_gradient(x.data(), dx.data(), 1e-6, |xs| {
            let xt = Tensor::from_vec(x.shape(), xs.to_vec());
            weighted_sum(&bn.forward(&xt, Mode::Train).unwrap(), &u)
        });
        assert_grad("bn dx", probe, r.max_rel_err);
        for (pname, which) in [("gamma", 0), ("beta", 1)] {
            let p0 = if which == 0 {
                bn.gamma.value.data().to_vec()
            } else {
                bn.beta.value.data().to_vec()
            };
            let grad = if which == 0 {
                bn.gamma.grad.data().to_vec()
            } else {
                bn.beta.grad.data().to_vec()
            };
            let r = check_gradient(&p0, &grad, 1e-6, |ps| {
                if which == 0 {
                    bn.gamma.value.data_mut().copy_from_slice(ps);
                } else {
                    bn.beta.value.data_mut().copy_from_slice(ps);
                }
                weighted_sum(&bn.forward(&x, Mode::Train).unwrap(), &u)
            });
            if which == 0 {
                bn.gamma.value.data_mut().copy_from_slice(&p0);
            } else {
                bn.beta.value.data_mut().copy_from_slice(&p0);
            }
            assert_grad(&format!("bn d{pname}"), probe, r.max_rel_err);
        }
    }

    // ReLU, away from the kink.
    for probe in 0..PROBES {
        let shape = [1 + probe % 3, 2, 3, 3];
        let mut x = rand_tensor(&shape, &mut rng, -2.0, 2.0);
        for v in x.data_mut() {
            if v.abs() < 0.05 {
                *v += 0.1;
            }
        }
        let mut relu = Relu::<f64>::new();
        let y = relu.forward(&x, Mode::Train);
        let u: Vec<f64> = (0..y.numel()).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let dx = relu.backward(&Tensor::from_vec(y.shape(), u.clone()));
        let r = check_gradient(x.data(), dx.data(), 1e-6, |xs| {
            let xt = Tensor::from_vec(&shape, xs.to_vec());
            weighted_sum(&relu.forward(&xt, Mode::Eval), &u)
        });
        assert_grad("relu dx", probe, r.max_rel_err);
    }

    // Dropout with a pinned mask: reseeding before each evaluation makes
    // the forward a pure function of its input.
    for probe in 0..PROBES {
        let shape = [2, 1 + probe % 3, 2, 2];
        let x = rand_tensor(&shape, &mut rng, -1.0, 1.0);
        let mut drop = Dropout::<f64>::new(0.5).unwrap();
        let mask_seed = 7000 + probe as u64;
        let mut mask_rng = RngState::seed_from(mask_seed);
        let y = drop.forward(&x, Mode::Train, &mut mask_rng);
        let u: Vec<f64> = (0..y.numel()).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let dx = drop.backward(&Tensor::from_vec(y.shape(), u.clone()));
        let r = check_gradient(x.data(), dx.data(), 1e-6, |xs| {
            let xt = Tensor::from_vec(&shape, xs.to_vec());
            let mut mask_rng = RngState::seed_from(mask_seed);
            weighted_sum(&drop.forward(&xt, Mode::Train, &mut mask_rng), &u)
        });
        assert_grad("dropout dx", probe, r.max_rel_err);
    }

    // Linear: input, weight, and bias gradients.
    for probe in 0..PROBES {
        let (n, fi, fo) = (1 + probe % 3, 2 + probe % 4, 1 + probe % 3);
        let x = rand_tensor(&[n, fi], &mut rng, -1.0, 1.0);
        let mut lin = Linear::<f64>::new(fi, fo, &mut rng);
        for v in lin.bias.value.data_mut() {
            *v = rng.uniform_in(-0.5, 0.5);
        }
        let y = lin.forward(&x, Mode::Train).unwrap();
        let u: Vec<f64> = (0..y.numel()).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        lin.weight.zero_grad();
        lin.bias.zero_grad();
        let dx = lin.backward(&Tensor::from_vec(y.shape(), u.clone()));

        let r = check_gradient(x.data(), dx.data(), 1e-6, |xs| {
            let xt = Tensor::from_vec(x.shape(), xs.to_vec());
            weighted_sum(&lin.forward(&xt, Mode::Eval).unwrap(), &u)
        });
        assert_grad("linear dx", probe, r.max_rel_err);
        let w0 = lin.weight.value.data().to_vec();
        let wg = lin.weight.grad.data().to_vec();
        let r = check_gradient(&w0, &wg, 1e-6, |ws| {
            lin.weight.value.data_mut().copy_from_slice(ws);
            weighted_sum(&lin.forward(&x, Mode::Eval).unwrap(), &u)
        });
        lin.weight.value.data_mut().copy_from_slice(&w0);
        assert_grad("linear dW", probe, r.max_rel_err);
        let b0 = lin.bias.value.data().to_vec();
        let bg = lin.bias.grad.data().to_vec();
        let r = check_gradient(&b0, &bg, 1e-6, |bs| {
            lin.bias.value.data_mut().copy_from_slice(bs);
            weighted_sum(&lin.forward(&x, Mode::Eval).unwrap(), &u)
        });
        lin.bias.value.data_mut().copy_from_slice(&b0);
        assert_grad("linear db", probe, r.max_rel_err);
    }

    // Global mean pooling.
    for probe in 0..PROBES {
        let shape = [1 + probe % 2, 1 + probe % 3, 2 + probe % 3, 2 + probe % 2];
        let x = rand_tensor(&shape, &mut rng, -1.0, 1.0);
        let mut pool = GlobalMeanPool::new();
        let y = pool.forward(&x, Mode::Train);
        let u: Vec<f64> = (0..y.numel()).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let dx = pool.backward(&Tensor::from_vec(y.shape(), u.clone()));
        let r = check_gradient(x.data(), dx.data(), 1e-6, |xs| {
            let xt = Tensor::from_vec(&shape, xs.to_vec());
            weighted_sum(&pool.forward(&xt, Mode::Eval), &u)
        });
        assert_grad("pool dx", probe, r.max_rel_err);
    }

    // Softmax cross-entropy: logits gradient of the scalar loss.
    for probe in 0..PROBES {
        let (n, c) = (1 + probe % 3, 2 + probe % 4);
        let logits = rand_tensor(&[n, c], &mut rng, -3.0, 3.0);
        let labels: Vec<u32> = (0..n).map(|_| (rng.next_u64() % c as u64) as u32).collect();
        let (_, grad) = softmax_cross_entropy_ids(&logits, &labels).unwrap();
        let r = check_gradient(logits.data(), grad.data(), 1e-6, |ls| {
            let lt = Tensor::from_vec(&[n, c], ls.to_vec());
            softmax_cross_entropy_ids(&lt, &labels).unwrap().0
        });
        assert_grad("softmax-ce dlogits", probe, r.max_rel_err);
    }

    // Six-layer miniature residual network end to end: all stem weights
    // plus sampled coordinates of every other parameter, through the full
    // forward/backward chain with pinned dropout masks.
    for probe in 0..PROBES {
        let classes = 2 + probe % 3;
        let mut net = Network::<f64>::micro(classes, &mut rng);
        let x = rand_tensor(&[2, 3, 8, 8], &mut rng, -1.0, 1.0);
        let labels: Vec<u32> = (0..2).map(|_| (rng.next_u64() % classes as u64) as u32).collect();
        let mask_seed = 9000 + probe as u64;

        let loss_of = |net: &mut Network<f64>| -> f64 {
            let mut mask_rng = RngState::seed_from(mask_seed);
            let logits = net.forward(&x, Mode::Train, &mut mask_rng).unwrap();
            softmax_cross_entropy_ids(&logits, &labels).unwrap().0
        };

        let base_loss = loss_of(&mut net);
        let mut mask_rng = RngState::seed_from(mask_seed);
        let logits = net.forward(&x, Mode::Train, &mut mask_rng).unwrap();
        let (loss, grad) = softmax_cross_entropy_ids(&logits, &labels).unwrap();
        assert!(rel_err(base_loss, loss) < 1e-12, "dropout mask not pinned");
        net.zero_grad();
        net.backward(&grad).unwrap();

        // (state index, coordinate, analytic gradient) triples to probe.
        let mut picks: Vec<(usize, usize, f64)> = Vec::new();
        let mut pick_rng = rng.fork(500 + probe as u64);
        for (si, slot) in net.state_mut().into_iter().enumerate() {
            if let StateMut::Param { name, param, .. } = slot {
                let n = param.value.numel();
                let take = if name == "stem.conv.weight" { n } else { 6 };
                for _ in 0..take.min(n) {
                    let ci = (pick_rng.next_u64() % n as u64) as usize;
                    picks.push((si, ci, param.grad.data()[ci]));
                }
            }
        }
        assert!(picks.len() > 120);
        let mut worst = 0.0f64;
        for (si, ci, analytic) in picks {
            let eval_at = |delta: f64, net: &mut Network<f64>| -> f64 {
                if let StateMut::Param { param, .. } = &mut net.state_mut()[si] {
                    param.value.data_mut()[ci] += delta;
                } else {
                    unreachable!("picked slot is a parameter");
                }
                let l = loss_of(net);
                if let StateMut::Param { param, .. } = &mut net.state_mut()[si] {
                    param.value.data_mut()[ci] -= delta;
                }
                l
            };
            // The optimal step varies per coordinate with the local
            // curvature, not with the gradient's correctness, so keep the
            // best of several unbiased estimates: plain central differences
            // at two steps plus a Richardson extrapolation that cancels
            // the quadratic truncation term.
            let mut central = |step: f64, net: &mut Network<f64>| {
                (eval_at(step, net) - eval_at(-step, net)) / (2.0 * step)
            };
            let d_coarse = central(1e-4, &mut net);
            let d_half = central(5e-5, &mut net);
            let candidates = [
                (4.0 * d_half - d_coarse) / 3.0,
                central(1e-5, &mut net),
                central(1e-6, &mut net),
            ];
            let err = candidates
                .iter()
                .map(|&numeric| rel_err(analytic, numeric))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(err);
        }
        assert_grad("miniature network", probe, worst);
    }

    println!("criterion 1 (gradient correctness): pass");
}

#[test]
fn criterion_2_encoding_law() {
    let layout = PartLayout::for_topology(Topology::KinectV1_20);
    let mut rng = RngState::seed_from(202);
    for i in 0..1000 {
        let frames = 5 + (i % 40);
        let seq = synth_sequence(Topology::KinectV1_20, (i % 8) as u32, frames, &mut rng);

        // Pre-rounding reals hit the interval endpoints exactly.
        let (values, _) = normalize(&seq, NormScope::PerSequence).unwrap();
        let flat: Vec<f64> = values.iter().flatten().flatten().copied().collect();
        let lo = flat.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = flat.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(lo, 0.0, "sequence {i}: min must map to exactly 0");
        assert_eq!(hi, 255.0, "sequence {i}: max must map to exactly 255");
        assert!(flat.iter().all(|v| (0.0..=255.0).contains(v)));

        // Per-sequence normalization cancels any affine coordinate change.
        let a = rng.uniform_in(0.1, 10.0);
        let b = rng.uniform_in(-5.0, 5.0);
        let moved = SkeletonSequence::new(
            seq.frames
                .iter()
                .map(|f| SkeletonFrame {
                    joints: f
                        .joints
                        .iter()
                        .map(|j| Joint::new(a * j.x + b, a * j.y + b, a * j.z + b))
                        .collect(),
                })
                .collect(),
            seq.label,
            seq.subject_id,
            seq.camera_id,
            seq.topology,
        )
        .unwrap();
        let img = encode_image(&seq, &layout).unwrap();
        let img_moved = encode_image(&moved, &layout).unwrap();
        assert_eq!(
            img.data, img_moved.data,
            "sequence {i}: affine change a={a} b={b} altered the encoding"
        );
    }
    println!("criterion 2 (encoding law): pass");
}

#[test]
fn criterion_3_architecture_conformance() {
    let unit_counts = [9usize, 15, 21, 27, 54];
    for (d, (&depth, &units)) in SUPPORTED_DEPTHS.iter().zip(&unit_counts).enumerate() {
        let classes = 8 + d; // vary to exercise the head
        let spec = NetworkSpec::new(depth, classes).unwrap();
        let mut rng = RngState::seed_from(depth as u64);
        let mut net = Network::<f32>::build(spec, &mut rng).unwrap();
        assert_eq!(net.num_units(), units, "depth {depth}");
        for (i, &(w, _)) in net.unit_plan().iter().enumerate() {
            let stage = i / (units / 3);
            assert_eq!(w, STAGE_WIDTHS[stage], "depth {depth} unit {i}");
        }

        // Closed-form element count, written independently of the builder:
        // stem 3x3 conv (3->16) + BN pairs, per-stage 3x3 conv pairs, one
        // 1x1 projection + BN at each of the two stage boundaries, FC head.
        let per = units / 3;
        let (w1, w2, w3) = (16usize, 32, 64);
        let stem = 16 * 3 * 9 + 2 * 16;
        let stage1 = per * (w1 * w1 * 9 + 2 * w1 + w1 * w1 * 9 + 2 * w1);
        let stage2 = (w2 * w1 * 9 + 2 * w2 + w2 * w2 * 9 + 2 * w2)
            + (per - 1) * (2 * (w2 * w2 * 9 + 2 * w2))
            + (w2 * w1 + 2 * w2);
        let stage3 = (w3 * w2 * 9 + 2 * w3 + w3 * w3 * 9 + 2 * w3)
            + (per - 1) * (2 * (w3 * w3 * 9 + 2 * w3))
            + (w3 * w2 + 2 * w3);
        let head = classes * w3 + classes;
        let independent = stem + stage1 + stage2 + stage3 + head;

        assert_eq!(count_parameters(&spec).unwrap(), independent, "depth {depth}");
        let built: usize = net
            .state_mut()
            .into_iter()
            .filter_map(|s| match s {
                StateMut::Param { param, .. } => Some(param.value.numel()),
                StateMut::Buffer { .. } => None,
            })
            .sum();
        assert_eq!(built, independent, "depth {depth}: built network disagrees");
    }
    println!("criterion 3 (architecture conformance): pass");
}

struct OverfitRun {
    train_acc: f64,
    test_acc: f64,
    losses: Vec<f64>,
}

fn overfit_run() -> OverfitRun {
    let topology = Topology::KinectV1_20;
    let layout = PartLayout::for_topology(topology);
    let to_images = |seed: u64, per_class: usize| -> Vec<(ColorImage, u32)> {
        let mut rng = RngState::seed_from(seed);
        synth_set(topology, 4, per_class, 30, &mut rng)
            .into_iter()
            .map(|s| (encode_image(&s, &layout).unwrap(), s.label))
            .collect()
    };
    // Augmentation off: the sanity oracle checks the optimizer, not the
    // crop pipeline (criterion 6 covers that separately).
    let train_samples = prepare_train_samples(&to_images(41, 16), false).unwrap();
    let test_samples = prepare_eval_samples(&to_images(42, 8)).unwrap();
    let cfg = TrainConfig {
        depth: 20,
        epochs: 60,
        seed: 7,
        augment: false,
        ..TrainConfig::default()
    };
    let out = train(&train_samples, &test_samples, 4, &cfg, |_| {}).unwrap();
    let mut net = out.network;
    OverfitRun {
        train_acc: 1.0 - evaluate(&mut net, &train_samples, cfg.batch_size).unwrap(),
        test_acc: 1.0 - out.report.best_test_err,
        losses: out.report.epochs.iter().map(|e| e.train_loss).collect(),
    }
}

static RUN_A: OnceLock<OverfitRun> = OnceLock::new();
static RUN_B: OnceLock<OverfitRun> = OnceLock::new();

#[test]
fn criterion_4_overfit_sanity() {
    let run = RUN_A.get_or_init(overfit_run);
    assert!(
        run.train_acc >= 0.99,
        "train accuracy {:.4} < 0.99",
        run.train_acc
    );
    assert!(
        run.test_acc >= 0.90,
        "held-out accuracy {:.4} < 0.90",
        run.test_acc
    );
    println!(
        "criterion 4 (overfit sanity): pass (train {:.4}, test {:.4})",
        run.train_acc, run.test_acc
    );
}

#[test]
fn criterion_5_determinism() {
    let a = RUN_A.get_or_init(overfit_run);
    let b = RUN_B.get_or_init(overfit_run);
    assert_eq!(a.losses, b.losses, "per-epoch losses differ between runs");

    // Encoded PNGs are byte-identical across repeated runs and thread counts.
    let bin = env!("CARGO_BIN_EXE_skelres");
    let tmp = tempfile::tempdir().unwrap();
    let seq_dir = tmp.path().join("seqs");
    std::fs::create_dir(&seq_dir).unwrap();
    let mut rng = RngState::seed_from(55);
    for (i, seq) in synth_set(Topology::KinectV1_20, 3, 4, 25, &mut rng)
        .iter()
        .enumerate()
    {
        std::fs::write(
            seq_dir.join(format!("seq{i:03}.txt")),
            skelres::skeleton::serialize_sequence(seq),
        )
        .unwrap();
    }
    let mut digests = Vec::new();
    for (run, threads) in [(0, "1"), (1, "4"), (2, "1")] {
        let out_dir = tmp.path().join(format!("out{run}"));
        let status = std::process::Command::new(bin)
            .args(["encode", "--input"])
            .arg(&seq_dir)
            .arg("--output")
            .arg(&out_dir)
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(status.success());
        let mut names: Vec<_> = std::fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        let blob: Vec<u8> = names
            .iter()
            .flat_map(|n| std::fs::read(out_dir.join(n)).unwrap())
            .collect();
        digests.push(blob);
    }
    assert_eq!(digests[0], digests[1], "outputs differ across thread counts");
    assert_eq!(digests[0], digests[2], "outputs differ across repeated runs");
    println!("criterion 5 (determinism): pass");
}

#[test]
fn criterion_6_augmentation_contract() {
    let mut rng = RngState::seed_from(606);
    for _ in 0..20 {
        let data: Vec<u8> = (0..40 * 40 * 3).map(|_| (rng.next_u64() & 0xff) as u8).collect();
        let img = ColorImage::new(40, 40, data);
        let set = augment_set(&img).unwrap();
        assert_eq!(set.len(), 24);
        for a in 0..set.len() {
            assert_eq!((set[a].height, set[a].width), (32, 32));
            for b in a + 1..set.len() {
                assert_ne!(set[a].data, set[b].data, "variants {a} and {b} collide");
            }
        }
        for axis in [FlipAxis::Horizontal, FlipAxis::Vertical] {
            assert_eq!(flip(&flip(&img, axis), axis).data, img.data);
        }
    }
    println!("criterion 6 (augmentation contract): pass");
}

#[test]
fn criterion_7_stage_timing() {
    let t = timeit_stages(32, Topology::KinectV2_25, 100, 10).unwrap();
    assert!(
        t.stage_a.mean_ms <= 50.0,
        "encoding stage {:.2} ms > 50 ms",
        t.stage_a.mean_ms
    );
    assert!(
        t.stage_c.mean_ms <= 200.0,
        "prediction stage {:.2} ms > 200 ms",
        t.stage_c.mean_ms
    );
    println!(
        "criterion 7 (stage timing): pass (A {:.2} ms, C {:.2} ms)",
        t.stage_a.mean_ms, t.stage_c.mean_ms
    );
}

#[test]
fn criterion_8_dataset_smoke() {
    let Some(dir) = std::env::var_os("SKELRES_MSR_DIR") else {
        println!("criterion 8 (dataset smoke): skip (SKELRES_MSR_DIR not set)");
        return;
    };
    let dir = std::path::PathBuf::from(dir);
    let bin = env!("CARGO_BIN_EXE_skelres");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let status = std::process::Command::new(bin)
        .args(["train", "--input"])
        .arg(&dir)
        .arg("--output")
        .arg(&out)
        .args(["--protocol", "as1", "--depth", "20", "--epochs", "5"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("checkpoint.skrn").is_file());
    assert!(out.join("report.csv").is_file());
    println!("criterion 8 (dataset smoke): pass");
}

// The input-size constant the whole pipeline is built around.
#[test]
fn input_contract() {
    assert_eq!(INPUT_SIZE, 32);
}
