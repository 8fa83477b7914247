//! Command-line surface: encode datasets, train models, predict labels,
//! and benchmark the pipeline stages.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use skelres::checkpoint::{self, CheckpointMeta};
use skelres::dataset::{build_split, DatasetIndex, Entry, Protocol};
use skelres::encode::{encode_image, NormStats};
use skelres::error::{Error, Result};
use skelres::image::{resize, ColorImage, CROP_SIZE, CROP_SOURCE};
use skelres::layout::PartLayout;
use skelres::network::SUPPORTED_DEPTHS;
use skelres::skeleton::{parse_sequence, Manifest, SkeletonSequence, Topology};
use skelres::train::{
    self, argmax_rows, default_batch_for_depth, prepare_eval_samples, prepare_train_samples,
    timeit_stages, TrainConfig,
};

#[derive(Parser)]
#[command(
    name = "skelres",
    version,
    about = "Skeleton action recognition via color-encoded joint sequences"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode sequence files into color PNG images plus an index CSV.
    Encode(EncodeArgs),
    /// Train a residual network on an encoded protocol split.
    Train(TrainArgs),
    /// Classify sequences with a trained checkpoint.
    Predict(PredictArgs),
    /// Time the pipeline stages on synthetic data.
    Bench(BenchArgs),
}

#[derive(Args)]
struct EncodeArgs {
    /// Directory of canonical sequence text files.
    #[arg(long)]
    input: PathBuf,
    /// Output directory for PNGs and index.csv.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "kinect-v1")]
    topology: Topology,
    /// Emit 40x40 images (augmentation-crop source size) instead of 32x32.
    #[arg(long = "augment-size")]
    augment_size: bool,
    /// Also write a `<name>.stats` sidecar with the normalization extrema.
    #[arg(long)]
    stats: bool,
    /// Worker threads; 0 means one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of canonical sequence text files (manifest.txt optional).
    #[arg(long)]
    input: PathBuf,
    /// Output directory for checkpoint and reports.
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    protocol: Protocol,
    /// Joint topology; defaults to kinect-v1 for AS protocols, kinect-v2 for NTU.
    #[arg(long)]
    topology: Option<Topology>,
    #[arg(long, default_value_t = 20)]
    depth: usize,
    #[arg(long, default_value_t = 120)]
    epochs: usize,
    /// Mini-batch size; defaults to 128, or 64 at depth 110.
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Crop/flip expansion of training images; defaults to on for AS
    /// protocols, off for NTU.
    #[arg(long)]
    augment: Option<bool>,
}

#[derive(Args)]
struct PredictArgs {
    /// A sequence file or a directory of them.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Class-name manifest; numeric names are synthesized without it.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    topology: Option<Topology>,
    /// Append the full probability distribution to each row.
    #[arg(long)]
    probs: bool,
    /// Worker threads for directory inputs; 0 means one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 32)]
    depth: usize,
    #[arg(long, default_value_t = 100)]
    frames: usize,
    #[arg(long, default_value = "kinect-v2")]
    topology: Topology,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SKELRES_LOG", "info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let status = match cli.cmd {
        Cmd::Encode(args) => cmd_encode(&args),
        Cmd::Train(args) => cmd_train(&args),
        Cmd::Predict(args) => cmd_predict(&args),
        Cmd::Bench(args) => cmd_bench(&args),
    };
    match status {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::BadConfig(format!("thread pool: {e}")))
}

/// Sequence files in `dir`, sorted by name for stable output order.
fn sequence_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_seq = path.extension().is_some_and(|e| e == "txt" || e == "skl")
            && path.file_name().is_some_and(|n| n != "manifest.txt");
        if path.is_file() && is_seq {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into())
}

fn read_sequence(path: &Path, topology: Topology) -> Result<SkeletonSequence> {
    let bytes = std::fs::read(path)?;
    parse_sequence(&bytes, topology)
}

fn cmd_encode(args: &EncodeArgs) -> Result<ExitCode> {
    let files = sequence_files(&args.input)?;
    std::fs::create_dir_all(&args.output)?;
    let layout = PartLayout::for_topology(args.topology);
    let side = if args.augment_size { CROP_SOURCE } else { CROP_SIZE };

    let pool = thread_pool(args.threads)?;
    // (stem, label, subject, camera) per success; message per failure.
    let results: Vec<std::result::Result<(String, u32, u32, Option<u32>), String>> = pool
        .install(|| {
            files
                .par_iter()
                .map(|path| {
                    let run = || -> Result<(String, u32, u32, Option<u32>)> {
                        let seq = read_sequence(path, args.topology)?;
                        let img = encode_image(&seq, &layout)?;
                        let img = resize(&img, side, side)?;
                        let stem = stem_of(path);
                        img.write_png(&args.output.join(format!("{stem}.png")))?;
                        if args.stats {
                            let st = NormStats::of_sequence(&seq)?;
                            std::fs::write(
                                args.output.join(format!("{stem}.stats")),
                                format!("c_min {}\nc_max {}\n", st.c_min, st.c_max),
                            )?;
                        }
                        Ok((stem, seq.label, seq.subject_id, seq.camera_id))
                    };
                    run().map_err(|e| format!("{}: {e}", path.display()))
                })
                .collect()
        });

    let mut index = String::from("file,label,subject,camera\n");
    let mut failures = 0usize;
    for r in results {
        match r {
            Ok((stem, label, subject, camera)) => {
                let camera = camera.map_or_else(|| "-".into(), |c| c.to_string());
                index.push_str(&format!("{stem}.png,{label},{subject},{camera}\n"));
            }
            Err(msg) => {
                failures += 1;
                eprintln!("error: {msg}");
            }
        }
    }
    std::fs::write(args.output.join("index.csv"), index)?;
    log::info!(
        "encoded {} sequences to {}{}",
        files.len() - failures,
        args.output.display(),
        if failures > 0 {
            format!(" ({failures} failed)")
        } else {
            String::new()
        }
    );
    Ok(if failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

/// Parse every sequence file into a split entry, skipping invalid files
/// with a warning.
fn index_directory(dir: &Path, topology: Topology, protocol: Protocol) -> Result<DatasetIndex> {
    let mut entries = Vec::new();
    let mut sequences = Vec::new();
    for path in sequence_files(dir)? {
        match read_sequence(&path, topology) {
            Ok(seq) => {
                entries.push(Entry {
                    path: path.clone(),
                    label: seq.label,
                    subject_id: seq.subject_id,
                    camera_id: seq.camera_id,
                });
                sequences.push(seq);
            }
            Err(e) => log::warn!("skipping {}: {e}", path.display()),
        }
    }
    let idx = build_split(entries, protocol)?;
    Ok(idx)
}

fn load_images(idx: &DatasetIndex, which: &[usize], layout: &PartLayout, topology: Topology)
    -> Result<Vec<(ColorImage, u32)>> {
    which
        .iter()
        .map(|&i| {
            let e = &idx.entries[i];
            let seq = read_sequence(&e.path, topology)?;
            Ok((encode_image(&seq, layout)?, e.label))
        })
        .collect()
}

fn cmd_train(args: &TrainArgs) -> Result<ExitCode> {
    if !SUPPORTED_DEPTHS.contains(&args.depth) {
        return Err(Error::UnsupportedDepth(args.depth));
    }
    let is_msr = matches!(args.protocol, Protocol::As1 | Protocol::As2 | Protocol::As3);
    let topology = args.topology.unwrap_or(if is_msr {
        Topology::KinectV1_20
    } else {
        Topology::KinectV2_25
    });
    let augment = args.augment.unwrap_or(is_msr);
    let layout = PartLayout::for_topology(topology);

    let idx = index_directory(&args.input, topology, args.protocol)?;
    if idx.train.is_empty() || idx.test.is_empty() {
        return Err(Error::EmptySplit);
    }
    let manifest_path = args.input.join("manifest.txt");
    let num_classes = if manifest_path.is_file() {
        Manifest::parse(&std::fs::read_to_string(&manifest_path)?)?.class_count()
    } else {
        idx.class_count()
    };
    for i in idx.train.iter().chain(&idx.test) {
        let label = idx.entries[*i].label;
        if label as usize >= num_classes {
            return Err(Error::BadLabel {
                label,
                classes: num_classes as u32,
            });
        }
    }

    let train_imgs = load_images(&idx, &idx.train, &layout, topology)?;
    let test_imgs = load_images(&idx, &idx.test, &layout, topology)?;
    let train_samples = prepare_train_samples(&train_imgs, augment)?;
    let test_samples = prepare_eval_samples(&test_imgs)?;
    log::info!(
        "{} train samples ({} sequences, augment={augment}), {} test sequences, {num_classes} classes",
        train_samples.len(),
        idx.train.len(),
        idx.test.len()
    );

    let cfg = TrainConfig {
        depth: args.depth,
        epochs: args.epochs,
        batch_size: args.batch.unwrap_or_else(|| default_batch_for_depth(args.depth)),
        seed: args.seed,
        augment,
        ..TrainConfig::default()
    };
    let outcome = train::train(&train_samples, &test_samples, num_classes, &cfg, |e| {
        log::info!(
            "epoch {:>3}  lr {:<7}  train loss {:.4}  train err {:.4}  test err {:.4}",
            e.epoch,
            e.lr,
            e.train_loss,
            e.train_err,
            e.test_err
        );
    })?;

    std::fs::create_dir_all(&args.output)?;
    let mut net = outcome.network;
    checkpoint::save(
        &mut net,
        CheckpointMeta {
            epoch: outcome.report.best_epoch as u32,
            seed: cfg.seed,
            joint_count: topology.joint_count() as u32,
        },
        &args.output.join("checkpoint.skrn"),
    )?;
    std::fs::write(args.output.join("report.csv"), outcome.report.to_csv())?;
    let summary = serde_json::json!({
        "config": cfg,
        "protocol": args.protocol,
        "classes": num_classes,
        "best_epoch": outcome.report.best_epoch,
        "best_test_err": outcome.report.best_test_err,
        "train_samples": outcome.report.train_samples,
        "test_samples": outcome.report.test_samples,
    });
    std::fs::write(
        args.output.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    log::info!(
        "best epoch {} with test error {:.4}; artifacts in {}",
        outcome.report.best_epoch,
        outcome.report.best_test_err,
        args.output.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn predict_one(
    net_bytes: &[u8],
    meta: CheckpointMeta,
    manifest: &Manifest,
    path: &Path,
    topology: Topology,
    probs: bool,
) -> Result<String> {
    let seq = read_sequence(path, topology)?;
    if meta.joint_count != 0 && meta.joint_count as usize != seq.joint_count() {
        return Err(Error::TopologyMismatch {
            expected: meta.joint_count as usize,
            found: seq.joint_count(),
        });
    }
    // Each worker re-loads the checkpoint: forward passes mutate layer
    // caches, so networks are not shared across threads.
    let (mut net, _) = checkpoint::load_bytes(net_bytes)?;
    let layout = PartLayout::for_topology(topology);
    let img = encode_image(&seq, &layout)?;
    let small = resize(&img, CROP_SIZE, CROP_SIZE)?;
    let sample = train::Sample {
        pixels: small.to_chw_f32(),
        label: seq.label,
    };
    let p = train::predict_probs(&mut net, &sample)?;
    let best = argmax_rows(&skelres::tensor::Tensor::from_vec(&[1, p.len()], p.clone()))[0];
    let name = manifest
        .name(best)
        .map(str::to_owned)
        .unwrap_or_else(|| format!("class-{best}"));
    let mut row = format!("{},{name},{}", stem_of(path), p[best as usize]);
    if probs {
        for v in &p {
            row.push_str(&format!(",{v}"));
        }
    }
    Ok(row)
}

fn cmd_predict(args: &PredictArgs) -> Result<ExitCode> {
    let bytes = std::fs::read(&args.checkpoint)?;
    let (net, meta) = checkpoint::load_bytes(&bytes)?;
    let num_classes = net.spec().num_classes;
    drop(net);
    let topology = match args.topology {
        Some(t) => t,
        None => Topology::from_joint_count(meta.joint_count as usize).ok_or_else(|| {
            Error::BadConfig(
                "checkpoint does not record a known topology; pass --topology".into(),
            )
        })?,
    };
    let manifest = match &args.manifest {
        Some(p) => Manifest::parse(&std::fs::read_to_string(p)?)?,
        None => Manifest::numbered(num_classes),
    };
    let files = if args.input.is_dir() {
        sequence_files(&args.input)?
    } else {
        vec![args.input.clone()]
    };
    if files.is_empty() {
        return Err(Error::EmptySplit);
    }

    let pool = thread_pool(args.threads)?;
    let rows: Vec<std::result::Result<String, String>> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                predict_one(&bytes, meta, &manifest, path, topology, args.probs)
                    .map_err(|e| format!("{}: {e}", path.display()))
            })
            .collect()
    });

    let mut failures = 0usize;
    for r in rows {
        match r {
            Ok(row) => println!("{row}"),
            Err(msg) => {
                failures += 1;
                eprintln!("error: {msg}");
            }
        }
    }
    Ok(if failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_bench(args: &BenchArgs) -> Result<ExitCode> {
    let t = timeit_stages(args.depth, args.topology, args.frames, args.runs)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&t).expect("timings serialize"));
    } else {
        println!(
            "depth {}  {} frames x {} joints  {} runs",
            t.depth, t.frames, t.joints, t.runs
        );
        println!("stage                mean-ms   variance-ms2");
        println!(
            "A encode            {:>8.3}   {:>12.6}",
            t.stage_a.mean_ms, t.stage_a.variance_ms2
        );
        println!(
            "B train-step        {:>8.3}   {:>12.6}",
            t.stage_b.mean_ms, t.stage_b.variance_ms2
        );
        println!(
            "C predict           {:>8.3}   {:>12.6}",
            t.stage_c.mean_ms, t.stage_c.variance_ms2
        );
    }
    Ok(ExitCode::SUCCESS)
}
