//! Browser playground: encode synthetic skeleton sequences in the page
//! and inspect the augmentation variants. Compile with
//! `wasm-pack build --target web` (or `cargo build --target
//! wasm32-unknown-unknown`) and serve `www/`.
//!
//! The `*_impl` functions carry the logic with plain string errors so the
//! crate also builds and tests natively; the exported wrappers only
//! translate errors for the JS side.

use wasm_bindgen::prelude::*;

use skelres::encode::encode_image;
use skelres::image::{augment_set, resize, ColorImage};
use skelres::layout::PartLayout;
use skelres::network::{count_parameters, describe, NetworkSpec};
use skelres::rng::RngState;
use skelres::skeleton::Topology;
use skelres::synth::synth_sequence;

/// An RGBA pixel buffer ready for `ImageData`.
#[wasm_bindgen]
pub struct Rgba {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

#[wasm_bindgen]
impl Rgba {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    #[wasm_bindgen(getter)]
    pub fn data(&self) -> Vec<u8> {
        self.data.clone()
    }
}

fn to_rgba(img: &ColorImage) -> Rgba {
    let mut data = Vec::with_capacity(img.height * img.width * 4);
    for chunk in img.data.chunks_exact(3) {
        data.extend_from_slice(&[chunk[0], chunk[1], chunk[2], 255]);
    }
    Rgba {
        width: img.width,
        height: img.height,
        data,
    }
}

fn synth_image(joints: u32, class: u32, frames: u32, seed: u64) -> Result<ColorImage, String> {
    let topology = Topology::from_joint_count(joints as usize)
        .ok_or_else(|| "joint count must be 20 or 25".to_string())?;
    if !(2..=2000).contains(&frames) {
        return Err("frames must lie in [2, 2000]".into());
    }
    let layout = PartLayout::for_topology(topology);
    let mut rng = RngState::seed_from(seed);
    let seq = synth_sequence(topology, class, frames as usize, &mut rng);
    encode_image(&seq, &layout).map_err(|e| e.to_string())
}

pub fn encode_synthetic_impl(
    joints: u32,
    class: u32,
    frames: u32,
    seed: u64,
) -> Result<Rgba, String> {
    Ok(to_rgba(&synth_image(joints, class, frames, seed)?))
}

pub fn augment_grid_impl(
    joints: u32,
    class: u32,
    frames: u32,
    seed: u64,
) -> Result<Rgba, String> {
    let img = synth_image(joints, class, frames, seed)?;
    let big = resize(&img, 40, 40).map_err(|e| e.to_string())?;
    let variants = augment_set(&big).map_err(|e| e.to_string())?;

    let (cols, rows, cell, gap) = (6usize, 4usize, 32usize, 2usize);
    let (gw, gh) = (cols * cell + (cols - 1) * gap, rows * cell + (rows - 1) * gap);
    let mut grid = ColorImage::filled(gh, gw, [24, 24, 24]);
    for (i, v) in variants.iter().enumerate() {
        let (r0, c0) = ((i / cols) * (cell + gap), (i % cols) * (cell + gap));
        for r in 0..cell {
            for c in 0..cell {
                grid.set_pixel(r0 + r, c0 + c, v.pixel(r, c));
            }
        }
    }
    Ok(to_rgba(&grid))
}

pub fn network_summary_impl(depth: u32, classes: u32) -> Result<String, String> {
    let spec =
        NetworkSpec::new(depth as usize, classes as usize).map_err(|e| e.to_string())?;
    let params = count_parameters(&spec).map_err(|e| e.to_string())?;
    let body = describe(&spec).map_err(|e| e.to_string())?;
    Ok(format!("{body}total parameters: {params}\n"))
}

/// Encode one synthetic sequence into its color image (rows = joints in
/// part order, columns = frames, channels = x/y/z).
#[wasm_bindgen]
pub fn encode_synthetic(joints: u32, class: u32, frames: u32, seed: u64) -> Result<Rgba, JsError> {
    encode_synthetic_impl(joints, class, frames, seed).map_err(|e| JsError::new(&e))
}

/// The 24 training variants of the same sequence, tiled on a 6x4 grid of
/// 32x32 crops with 2-pixel gutters.
#[wasm_bindgen]
pub fn augment_grid(joints: u32, class: u32, frames: u32, seed: u64) -> Result<Rgba, JsError> {
    augment_grid_impl(joints, class, frames, seed).map_err(|e| JsError::new(&e))
}

/// Layer inventory of one of the supported classifier depths.
#[wasm_bindgen]
pub fn network_summary(depth: u32, classes: u32) -> Result<String, JsError> {
    network_summary_impl(depth, classes).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_produces_rgba_of_right_size() {
        let img = encode_synthetic_impl(20, 1, 30, 7).unwrap();
        assert_eq!(img.width(), 30);
        assert_eq!(img.height(), 20);
        assert_eq!(img.data().len(), 20 * 30 * 4);
        assert!(img.data().chunks_exact(4).all(|p| p[3] == 255));
    }

    #[test]
    fn grid_holds_24_tiles() {
        let g = augment_grid_impl(25, 3, 40, 1).unwrap();
        assert_eq!(g.width(), 6 * 32 + 5 * 2);
        assert_eq!(g.height(), 4 * 32 + 3 * 2);
    }

    #[test]
    fn summary_lists_units_and_params() {
        let s = network_summary_impl(20, 8).unwrap();
        assert_eq!(s.matches("residual unit").count(), 9);
        assert!(s.contains("total parameters: "));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(encode_synthetic_impl(19, 0, 30, 0).is_err());
        assert!(encode_synthetic_impl(20, 0, 1, 0).is_err());
        assert!(network_summary_impl(21, 8).is_err());
    }
}
