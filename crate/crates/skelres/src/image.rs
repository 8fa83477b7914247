//! 8-bit RGB images: container, bilinear resize, deterministic crops and
//! flips, PNG persistence.

use std::path::Path;

use crate::error::{Error, Result};

/// H x W x 3 image, row-major, 8-bit channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    pub height: usize,
    pub width: usize,
    pub data: Vec<u8>,
}

/// Round half to even, then clamp to [0, 255].
pub fn quantize(v: f64) -> u8 {
    let r = v.round_ties_even();
    r.clamp(0.0, 255.0) as u8
}

impl ColorImage {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), height * width * 3);
        ColorImage {
            height,
            width,
            data,
        }
    }

    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(height * width * 3);
        for _ in 0..height * width {
            data.extend_from_slice(&rgb);
        }
        ColorImage::new(height, width, data)
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, row: usize, col: usize, rgb: [u8; 3]) {
        let i = (row * self.width + col) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Unit-scaled CHW planes (R plane, then G, then B), the network-input
    /// form: each value is `byte / 255`.
    pub fn to_chw_f32(&self) -> Vec<f32> {
        let hw = self.height * self.width;
        let mut out = vec![0.0f32; 3 * hw];
        for (i, px) in self.data.chunks_exact(3).enumerate() {
            out[i] = px[0] as f32 / 255.0;
            out[hw + i] = px[1] as f32 / 255.0;
            out[2 * hw + i] = px[2] as f32 / 255.0;
        }
        out
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        image::save_buffer(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            image::ColorType::Rgb8,
        )
        .map_err(|e| Error::Png(e.to_string()))
    }

    pub fn read_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::Png(e.to_string()))?;
        let rgb = img.to_rgb8();
        Ok(ColorImage::new(
            rgb.height() as usize,
            rgb.width() as usize,
            rgb.into_raw(),
        ))
    }
}

/// Bilinear resize with half-pixel-centered sampling.
pub fn resize(img: &ColorImage, out_h: usize, out_w: usize) -> Result<ColorImage> {
    if img.height == 0 || img.width == 0 || out_h == 0 || out_w == 0 {
        return Err(Error::ZeroDimension);
    }
    if out_h == img.height && out_w == img.width {
        return Ok(img.clone());
    }
    let scale_y = img.height as f64 / out_h as f64;
    let scale_x = img.width as f64 / out_w as f64;
    let mut data = Vec::with_capacity(out_h * out_w * 3);
    for oy in 0..out_h {
        // Half-pixel centers: the output center maps into source coordinates.
        let sy = (oy as f64 + 0.5) * scale_y - 0.5;
        let y0 = sy.floor();
        let fy = sy - y0;
        let y0i = (y0 as isize).clamp(0, img.height as isize - 1) as usize;
        let y1i = ((y0 as isize) + 1).clamp(0, img.height as isize - 1) as usize;
        for ox in 0..out_w {
            let sx = (ox as f64 + 0.5) * scale_x - 0.5;
            let x0 = sx.floor();
            let fx = sx - x0;
            let x0i = (x0 as isize).clamp(0, img.width as isize - 1) as usize;
            let x1i = ((x0 as isize) + 1).clamp(0, img.width as isize - 1) as usize;
            let p00 = img.pixel(y0i, x0i);
            let p01 = img.pixel(y0i, x1i);
            let p10 = img.pixel(y1i, x0i);
            let p11 = img.pixel(y1i, x1i);
            for c in 0..3 {
                let top = p00[c] as f64 * (1.0 - fx) + p01[c] as f64 * fx;
                let bot = p10[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
                let v = top * (1.0 - fy) + bot * fy;
                data.push(quantize(v.clamp(0.0, 255.0)));
            }
        }
    }
    Ok(ColorImage::new(out_h, out_w, data))
}

pub const CROP_SOURCE: usize = 40;
pub const CROP_SIZE: usize = 32;

/// Fixed crop anchors: four corners plus four edge midpoints, as
/// (row, col) offsets of the 32x32 window within the 40x40 source.
pub const CROP_ANCHORS: [(usize, usize); 8] = [
    (0, 0),
    (0, 8),
    (8, 0),
    (8, 8),
    (0, 4),
    (8, 4),
    (4, 0),
    (4, 8),
];

fn require_crop_source(img: &ColorImage) -> Result<()> {
    if img.height != CROP_SOURCE || img.width != CROP_SOURCE {
        return Err(Error::WrongImageSize {
            found_h: img.height,
            found_w: img.width,
            want_h: CROP_SOURCE,
            want_w: CROP_SOURCE,
        });
    }
    Ok(())
}

fn crop(img: &ColorImage, row0: usize, col0: usize) -> ColorImage {
    let mut data = Vec::with_capacity(CROP_SIZE * CROP_SIZE * 3);
    for r in 0..CROP_SIZE {
        let start = ((row0 + r) * img.width + col0) * 3;
        data.extend_from_slice(&img.data[start..start + CROP_SIZE * 3]);
    }
    ColorImage::new(CROP_SIZE, CROP_SIZE, data)
}

/// The eight deterministic 32x32 crops of a 40x40 image, in anchor order.
pub fn crops8(img: &ColorImage) -> Result<Vec<ColorImage>> {
    require_crop_source(img)?;
    Ok(CROP_ANCHORS
        .iter()
        .map(|&(r, c)| crop(img, r, c))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipAxis {
    Horizontal,
    Vertical,
}

/// Reverse columns (horizontal) or rows (vertical).
pub fn flip(img: &ColorImage, axis: FlipAxis) -> ColorImage {
    let mut out = img.clone();
    for r in 0..img.height {
        for c in 0..img.width {
            let (sr, sc) = match axis {
                FlipAxis::Horizontal => (r, img.width - 1 - c),
                FlipAxis::Vertical => (img.height - 1 - r, c),
            };
            out.set_pixel(r, c, img.pixel(sr, sc));
        }
    }
    out
}

/// Full augmentation fan-out: 8 crops x {identity, horizontal flip,
/// vertical flip} = 24 images, crop-major, variant-minor.
pub fn augment_set(img: &ColorImage) -> Result<Vec<ColorImage>> {
    let crops = crops8(img)?;
    let mut out = Vec::with_capacity(24);
    for c in crops {
        let h = flip(&c, FlipAxis::Horizontal);
        let v = flip(&c, FlipAxis::Vertical);
        out.push(c);
        out.push(h);
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_rounds_half_to_even() {
        assert_eq!(quantize(0.5), 0);
        assert_eq!(quantize(1.5), 2);
        assert_eq!(quantize(2.5), 2);
        assert_eq!(quantize(254.5), 254);
        assert_eq!(quantize(255.2), 255);
        assert_eq!(quantize(-0.4), 0);
    }

    #[test]
    fn resize_identity_dimensions() {
        let img = ColorImage::new(3, 5, (0..45).collect());
        assert_eq!(resize(&img, 3, 5).unwrap(), img);
    }

    #[test]
    fn resize_uniform_stays_uniform() {
        let img = ColorImage::filled(7, 11, [13, 200, 77]);
        for (h, w) in [(32, 32), (3, 3), (40, 40), (1, 1)] {
            let out = resize(&img, h, w).unwrap();
            assert!(out.data.chunks_exact(3).all(|px| px == [13, 200, 77]));
        }
    }

    #[test]
    fn resize_2x2_to_1x1_averages() {
        // Single output center samples exactly the middle of the 2x2 block.
        let img = ColorImage::new(
            2,
            2,
            vec![
                10, 0, 0, //
                20, 0, 0, //
                30, 0, 0, //
                44, 0, 0,
            ],
        );
        let out = resize(&img, 1, 1).unwrap();
        assert_eq!(out.pixel(0, 0), [26, 0, 0]); // (10+20+30+44)/4 = 26
    }

    #[test]
    fn resize_rejects_zero_dimension() {
        let img = ColorImage::filled(2, 2, [0, 0, 0]);
        assert!(matches!(resize(&img, 0, 4), Err(Error::ZeroDimension)));
    }

    #[test]
    fn crops8_shapes_and_marker() {
        let mut img = ColorImage::filled(40, 40, [0, 0, 0]);
        img.set_pixel(0, 0, [255, 255, 255]);
        let crops = crops8(&img).unwrap();
        assert_eq!(crops.len(), 8);
        for (i, c) in crops.iter().enumerate() {
            assert_eq!((c.height, c.width), (32, 32));
            let has_marker = c.data.chunks_exact(3).any(|px| px == [255, 255, 255]);
            // Only the (0, 0) anchor retains the corner marker.
            assert_eq!(has_marker, CROP_ANCHORS[i] == (0, 0), "crop {i}");
        }
    }

    #[test]
    fn crops8_constant_image_gives_identical_crops() {
        let img = ColorImage::filled(40, 40, [9, 9, 9]);
        let crops = crops8(&img).unwrap();
        assert!(crops.iter().all(|c| *c == crops[0]));
    }

    #[test]
    fn crops8_rejects_wrong_size() {
        let img = ColorImage::filled(32, 32, [0, 0, 0]);
        assert!(matches!(crops8(&img), Err(Error::WrongImageSize { .. })));
    }

    #[test]
    fn flip_is_involution() {
        let img = ColorImage::new(3, 4, (0..36).collect());
        for axis in [FlipAxis::Horizontal, FlipAxis::Vertical] {
            assert_eq!(flip(&flip(&img, axis), axis), img);
        }
    }

    #[test]
    fn flip_1x2_swaps() {
        let img = ColorImage::new(1, 2, vec![1, 2, 3, 4, 5, 6]);
        let out = flip(&img, FlipAxis::Horizontal);
        assert_eq!(out.data, vec![4, 5, 6, 1, 2, 3]);
    }

    #[test]
    fn column_symmetric_image_is_hflip_fixed_point() {
        let img = ColorImage::new(1, 3, vec![7, 7, 7, 1, 2, 3, 7, 7, 7]);
        assert_eq!(flip(&img, FlipAxis::Horizontal), img);
    }

    #[test]
    fn augment_set_ordering_contract() {
        let mut img = ColorImage::filled(40, 40, [0, 0, 0]);
        for r in 0..40 {
            for c in 0..40 {
                img.set_pixel(r, c, [(r * 6) as u8, (c * 6) as u8, 1]);
            }
        }
        let aug = augment_set(&img).unwrap();
        assert_eq!(aug.len(), 24);
        let crops = crops8(&img).unwrap();
        assert_eq!(aug[0], crops[0]);
        assert_eq!(aug[1], flip(&crops[0], FlipAxis::Horizontal));
        assert_eq!(aug[2], flip(&crops[0], FlipAxis::Vertical));
        assert_eq!(aug[3], crops[1]);
    }

    #[test]
    fn augment_set_constant_input() {
        let img = ColorImage::filled(40, 40, [5, 6, 7]);
        let aug = augment_set(&img).unwrap();
        assert_eq!(aug.len(), 24);
        assert!(aug.iter().all(|a| *a == aug[0]));
    }
}
