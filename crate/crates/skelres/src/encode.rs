//! Skeleton-sequence to color-image encoding.
//!
//! Every 3D coordinate of a sequence is mapped affinely to [0, 255] using
//! the shared minimum and maximum over all joints, frames and axes; the
//! normalized frames are then stacked in temporal order so that rows are
//! (reordered) joints, columns are frames, and the channels carry the
//! normalized x, y, z values as R, G, B.

use crate::error::{Error, Result};
use crate::image::{quantize, ColorImage};
use crate::layout::PartLayout;
use crate::skeleton::SkeletonSequence;

/// Extrema of the coordinate set the normalization was computed over.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormStats {
    pub c_min: f64,
    pub c_max: f64,
}

impl NormStats {
    /// Scan a sequence for its joint coordinate extrema.
    pub fn of_sequence(seq: &SkeletonSequence) -> Result<Self> {
        let mut c_min = f64::INFINITY;
        let mut c_max = f64::NEG_INFINITY;
        for v in seq.coords() {
            c_min = c_min.min(v);
            c_max = c_max.max(v);
        }
        if !(c_min < c_max) {
            return Err(Error::DegenerateRange);
        }
        Ok(NormStats { c_min, c_max })
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        // Divide before scaling so the extrema land on exactly 0 and 255.
        (v - self.c_min) / (self.c_max - self.c_min) * 255.0
    }
}

/// Where the normalization extrema come from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NormScope {
    /// Extrema computed over the sequence itself; each image becomes
    /// invariant to global scale and translation of its sequence.
    #[default]
    PerSequence,
    /// Fixed extrema supplied by the caller (e.g. dataset-wide).
    Fixed(NormStats),
}

/// Normalize all coordinates to [0, 255].
///
/// Returns, per frame, per joint, the normalized `[x', y', z']` triple
/// (pre-rounding reals), along with the stats used.
pub fn normalize(
    seq: &SkeletonSequence,
    scope: NormScope,
) -> Result<(Vec<Vec<[f64; 3]>>, NormStats)> {
    let stats = match scope {
        NormScope::PerSequence => NormStats::of_sequence(seq)?,
        NormScope::Fixed(s) => {
            if !(s.c_min < s.c_max) {
                return Err(Error::DegenerateRange);
            }
            s
        }
    };
    let frames = seq
        .frames
        .iter()
        .map(|f| {
            f.joints
                .iter()
                .map(|j| [stats.apply(j.x), stats.apply(j.y), stats.apply(j.z)])
                .collect()
        })
        .collect();
    Ok((frames, stats))
}

/// Encode a sequence into its K x N color image.
pub fn encode_image(seq: &SkeletonSequence, layout: &PartLayout) -> Result<ColorImage> {
    encode_image_scoped(seq, layout, NormScope::PerSequence)
}

pub fn encode_image_scoped(
    seq: &SkeletonSequence,
    layout: &PartLayout,
    scope: NormScope,
) -> Result<ColorImage> {
    let k = seq.joint_count();
    if layout.joint_count() != k {
        return Err(Error::BadLayout(format!(
            "layout is for {} joints, sequence has {k}",
            layout.joint_count()
        )));
    }
    let (frames, _) = normalize(seq, scope)?;
    let n = frames.len();
    let mut data = vec![0u8; k * n * 3];
    for (col, frame) in frames.iter().enumerate() {
        for row in 0..k {
            let [x, y, z] = frame[layout.source_of_row(row)];
            let i = (row * n + col) * 3;
            data[i] = quantize(x);
            data[i + 1] = quantize(y);
            data[i + 2] = quantize(z);
        }
    }
    Ok(ColorImage::new(k, n, data))
}
