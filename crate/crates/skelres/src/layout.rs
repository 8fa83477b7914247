//! Body-part joint ordering.
//!
//! Rows of the encoded image follow the five-part order P1 (left arm),
//! P2 (right arm), P3 (trunk), P4 (left leg), P5 (right leg), each part
//! listing its joints along their physical connections. The concrete
//! index tables ship as data files; the two standard Kinect topologies
//! are embedded as defaults.

use crate::error::{Error, Result};
use crate::skeleton::Topology;

const KINECT_V1_20: &str = include_str!("../data/kinect_v1_20.layout");
const KINECT_V2_25: &str = include_str!("../data/kinect_v2_25.layout");

/// A joint-index permutation realizing the five-part row order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartLayout {
    /// Output row `r` takes source joint `permutation[r]`.
    permutation: Vec<usize>,
    /// Start offsets of P1..P5 within the permutation, plus the end.
    boundaries: [usize; 6],
}

impl PartLayout {
    /// Parse a layout file: five lines `P1: i j k ...` .. `P5: ...`,
    /// `#` comments and blank lines ignored. The concatenated indices
    /// must form a permutation of [0, K).
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts: [Option<Vec<usize>>; 5] = Default::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tag, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::BadLayout(format!("expected `P<n>: ...`, got `{line}`")))?;
            let pn: usize = tag
                .trim()
                .strip_prefix('P')
                .and_then(|d| d.parse().ok())
                .filter(|&d| (1..=5).contains(&d))
                .ok_or_else(|| Error::BadLayout(format!("bad part tag `{tag}`")))?;
            if parts[pn - 1].is_some() {
                return Err(Error::BadLayout(format!("duplicate part P{pn}")));
            }
            let indices = rest
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::BadLayout(format!("bad joint index `{t}`")))
                })
                .collect::<Result<Vec<usize>>>()?;
            if indices.is_empty() {
                return Err(Error::BadLayout(format!("empty part P{pn}")));
            }
            parts[pn - 1] = Some(indices);
        }

        let mut permutation = Vec::new();
        let mut boundaries = [0usize; 6];
        for (i, part) in parts.into_iter().enumerate() {
            let part = part.ok_or_else(|| Error::BadLayout(format!("missing part P{}", i + 1)))?;
            boundaries[i] = permutation.len();
            permutation.extend(part);
        }
        boundaries[5] = permutation.len();

        let k = permutation.len();
        let mut seen = vec![false; k];
        for &j in &permutation {
            if j >= k || seen[j] {
                return Err(Error::BadLayout(format!(
                    "indices are not a permutation of [0, {k})"
                )));
            }
            seen[j] = true;
        }
        Ok(PartLayout {
            permutation,
            boundaries,
        })
    }

    /// The embedded default layout for a topology.
    pub fn for_topology(topology: Topology) -> Self {
        let text = match topology {
            Topology::KinectV1_20 => KINECT_V1_20,
            Topology::KinectV2_25 => KINECT_V2_25,
        };
        Self::parse(text).expect("embedded layout is valid")
    }

    /// Joint count K.
    pub fn joint_count(&self) -> usize {
        self.permutation.len()
    }

    /// Source joint index feeding output row `r`.
    pub fn source_of_row(&self, r: usize) -> usize {
        self.permutation[r]
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Index range of part `p` (1-based) within the output rows.
    pub fn part_range(&self, p: usize) -> std::ops::Range<usize> {
        assert!((1..=5).contains(&p));
        self.boundaries[p - 1]..self.boundaries[p]
    }

    /// Identity layout with everything in one nominal part split; used by
    /// synthetic pipelines where physical parts are meaningless.
    pub fn identity(k: usize) -> Self {
        assert!(k >= 5, "identity layout needs at least 5 joints");
        let permutation: Vec<usize> = (0..k).collect();
        // Five roughly equal chunks.
        let mut boundaries = [0usize; 6];
        for (i, b) in boundaries.iter_mut().enumerate() {
            *b = i * k / 5;
        }
        boundaries[5] = k;
        PartLayout {
            permutation,
            boundaries,
        }
    }
}

/// Apply the layout to a stack of per-joint rows.
///
/// `rows[r]` of the output is `rows[layout.permutation[r]]` of the input.
pub fn reorder_joints<T: Clone>(rows: &[T], layout: &PartLayout) -> Result<Vec<T>> {
    if rows.len() != layout.joint_count() {
        return Err(Error::BadLayout(format!(
            "layout is for {} joints, input has {}",
            layout.joint_count(),
            rows.len()
        )));
    }
    Ok(layout.permutation.iter().map(|&j| rows[j].clone()).collect())
}
