//! Skeleton sequence model and the canonical on-disk text format.
//!
//! A sequence file is UTF-8 text: one header line `K N label subject camera`
//! (camera may be `-`), followed by N blocks of K lines, each holding the
//! `x y z` coordinates of one joint in fixed topology order.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Joint topology of the capturing sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Topology {
    /// Kinect v1, 20 joints (MSR Action3D).
    KinectV1_20,
    /// Kinect v2, 25 joints (NTU RGB+D).
    KinectV2_25,
}

impl Topology {
    pub fn joint_count(self) -> usize {
        match self {
            Topology::KinectV1_20 => 20,
            Topology::KinectV2_25 => 25,
        }
    }

    pub fn from_joint_count(k: usize) -> Option<Self> {
        match k {
            20 => Some(Topology::KinectV1_20),
            25 => Some(Topology::KinectV2_25),
            _ => None,
        }
    }
}

impl FromStr for Topology {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "kinect-v1" => Ok(Topology::KinectV1_20),
            "kinect-v2" => Ok(Topology::KinectV2_25),
            other => Err(format!("unknown topology `{other}`")),
        }
    }
}

/// One tracked joint position in sensor units (meters for Kinect streams).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Joint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Joint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Joint { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// One frame: the positions of all K joints at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFrame {
    pub joints: Vec<Joint>,
}

/// A complete labeled action instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonSequence {
    pub frames: Vec<SkeletonFrame>,
    /// 0-based action class id.
    pub label: u32,
    pub subject_id: u32,
    pub camera_id: Option<u32>,
    pub topology: Topology,
}

impl SkeletonSequence {
    pub fn new(
        frames: Vec<SkeletonFrame>,
        label: u32,
        subject_id: u32,
        camera_id: Option<u32>,
        topology: Topology,
    ) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::TooFewFrames(frames.len()));
        }
        let k = topology.joint_count();
        for (fi, frame) in frames.iter().enumerate() {
            if frame.joints.len() != k {
                return Err(Error::WrongJointCount {
                    frame: fi,
                    expected: k,
                    found: frame.joints.len(),
                });
            }
            for (ji, joint) in frame.joints.iter().enumerate() {
                if !joint.is_finite() {
                    return Err(Error::NonFiniteCoordinate {
                        frame: fi,
                        joint: ji,
                    });
                }
            }
        }
        Ok(SkeletonSequence {
            frames,
            label,
            subject_id,
            camera_id,
            topology,
        })
    }

    /// Number of frames (N).
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Joints per frame (K).
    pub fn joint_count(&self) -> usize {
        self.topology.joint_count()
    }

    /// Iterate over every coordinate of every joint of every frame.
    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        self.frames
            .iter()
            .flat_map(|f| f.joints.iter())
            .flat_map(|j| [j.x, j.y, j.z])
    }
}

/// Parse a sequence from the canonical text format.
///
/// Frame order is preserved exactly as read. The declared topology must
/// match the joint count in the header.
pub fn parse_sequence(bytes: &[u8], topology: Topology) -> Result<SkeletonSequence> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::MalformedHeader("file is not valid UTF-8".into()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());

    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(Error::MalformedHeader(format!(
            "expected `K N label subject camera`, got `{header}`"
        )));
    }
    let k: usize = fields[0]
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad joint count `{}`", fields[0])))?;
    let n: usize = fields[1]
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad frame count `{}`", fields[1])))?;
    let label: u32 = fields[2]
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad label `{}`", fields[2])))?;
    let subject: u32 = fields[3]
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad subject `{}`", fields[3])))?;
    let camera: Option<u32> = if fields[4] == "-" {
        None
    } else {
        Some(
            fields[4]
                .parse()
                .map_err(|_| Error::MalformedHeader(format!("bad camera `{}`", fields[4])))?,
        )
    };

    if k != topology.joint_count() {
        return Err(Error::WrongJointCount {
            frame: 0,
            expected: topology.joint_count(),
            found: k,
        });
    }
    if n < 2 {
        return Err(Error::TooFewFrames(n));
    }

    let mut frames = Vec::with_capacity(n);
    for fi in 0..n {
        let mut joints = Vec::with_capacity(k);
        for ji in 0..k {
            let line = lines.next().ok_or(Error::WrongJointCount {
                frame: fi,
                expected: k,
                found: ji,
            })?;
            let coords: Vec<&str> = line.split_whitespace().collect();
            if coords.len() != 3 {
                return Err(Error::MalformedHeader(format!(
                    "frame {fi}, joint {ji}: expected `x y z`, got `{line}`"
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::NonFiniteCoordinate { frame: fi, joint: ji })?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteCoordinate { frame: fi, joint: ji });
                }
                Ok(v)
            };
            joints.push(Joint::new(parse(coords[0])?, parse(coords[1])?, parse(coords[2])?));
        }
        frames.push(SkeletonFrame { joints });
    }
    if lines.next().is_some() {
        return Err(Error::MalformedHeader("trailing data after last frame".into()));
    }

    SkeletonSequence::new(frames, label, subject, camera, topology)
}

/// Serialize a sequence to the canonical text format.
///
/// Coordinates are written with full round-trip precision so that
/// `parse(serialize(seq)) == seq` bit-exactly.
pub fn serialize_sequence(seq: &SkeletonSequence) -> String {
    let mut out = String::new();
    let camera = seq
        .camera_id
        .map(|c| c.to_string())
        .unwrap_or_else(|| "-".to_string());
    let _ = writeln!(
        out,
        "{} {} {} {} {}",
        seq.joint_count(),
        seq.len(),
        seq.label,
        seq.subject_id,
        camera
    );
    for frame in &seq.frames {
        for j in &frame.joints {
            // `{}` on f64 prints the shortest representation that parses back
            // to the same bits.
            let _ = writeln!(out, "{} {} {}", j.x, j.y, j.z);
        }
    }
    out
}

/// Class-id to action-name mapping, one `id<TAB>name` per line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    names: Vec<String>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, name) = line
                .split_once('\t')
                .ok_or_else(|| Error::BadManifest(format!("line {}: expected `id<TAB>name`", ln + 1)))?;
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| Error::BadManifest(format!("line {}: bad id `{id}`", ln + 1)))?;
            pairs.push((id, name.trim().to_string()));
        }
        if pairs.is_empty() {
            return Err(Error::BadManifest("no entries".into()));
        }
        pairs.sort_by_key(|(id, _)| *id);
        for (want, (id, _)) in pairs.iter().enumerate() {
            if *id != want {
                return Err(Error::BadManifest(format!(
                    "ids must be contiguous from 0; missing id {want}"
                )));
            }
        }
        Ok(Manifest {
            names: pairs.into_iter().map(|(_, n)| n).collect(),
        })
    }

    /// Synthesize `class-0` .. `class-{n-1}` names when no manifest is given.
    pub fn numbered(n: usize) -> Self {
        Manifest {
            names: (0..n).map(|i| format!("class-{i}")).collect(),
        }
    }

    pub fn class_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(|s| s.as_str())
    }
}
