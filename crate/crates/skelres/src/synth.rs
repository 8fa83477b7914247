//! Synthetic skeleton sequences for tests, benchmarks, and demos.
//!
//! Each class gets a distinct base frequency; joints trace sinusoids
//! with per-joint phase offsets plus a little seeded jitter, so classes
//! are separable but not trivially so.

use crate::rng::RngState;
use crate::skeleton::{Joint, SkeletonFrame, SkeletonSequence, Topology};

/// Generate one sequence of `frames` frames for `class` (0-based).
pub fn synth_sequence(
    topology: Topology,
    class: u32,
    frames: usize,
    rng: &mut RngState,
) -> SkeletonSequence {
    let k = topology.joint_count();
    // Geometric frequency spacing plus a class-dependent phase slope
    // across the joints keeps the classes well separated in the encoded
    // image (both column and row patterns differ).
    let freq = 0.5 * 1.8f64.powi(class as i32 % 8);
    let slope = 2.0 + 1.5 * (class % 8) as f64;
    let phase_jitter: Vec<f64> = (0..k).map(|_| rng.uniform_in(-0.2, 0.2)).collect();
    let amp_jitter: Vec<f64> = (0..k).map(|_| rng.uniform_in(0.85, 1.15)).collect();
    let mut out = Vec::with_capacity(frames);
    for t in 0..frames {
        let tt = t as f64 / frames as f64;
        let mut joints = Vec::with_capacity(k);
        for j in 0..k {
            let base = j as f64 / k as f64;
            let arg = std::f64::consts::TAU * freq * tt + base * slope + phase_jitter[j];
            joints.push(Joint {
                x: amp_jitter[j] * arg.sin() + 0.05 * rng.uniform_in(-1.0, 1.0),
                y: amp_jitter[j] * arg.cos() + base + 0.05 * rng.uniform_in(-1.0, 1.0),
                z: 2.0 + 0.5 * (arg * 0.5).sin() + 0.03 * rng.uniform_in(-1.0, 1.0),
            });
        }
        out.push(SkeletonFrame { joints });
    }
    SkeletonSequence::new(out, class, 1, None, topology).expect("synthetic sequence is valid")
}

/// A balanced labelled set: `per_class` sequences for each of `classes`.
pub fn synth_set(
    topology: Topology,
    classes: u32,
    per_class: usize,
    frames: usize,
    rng: &mut RngState,
) -> Vec<SkeletonSequence> {
    let mut out = Vec::with_capacity(classes as usize * per_class);
    for class in 0..classes {
        for _ in 0..per_class {
            out.push(synth_sequence(topology, class, frames, rng));
        }
    }
    out
}
