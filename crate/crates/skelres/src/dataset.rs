//! Dataset indexing and the train/test protocol splits.

use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::error::{Error, Result};

/// Evaluation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Protocol {
    As1,
    As2,
    As3,
    NtuCrossSubject,
    NtuCrossView,
}

impl std::str::FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "as1" => Ok(Protocol::As1),
            "as2" => Ok(Protocol::As2),
            "as3" => Ok(Protocol::As3),
            "ntu-xsub" => Ok(Protocol::NtuCrossSubject),
            "ntu-xview" => Ok(Protocol::NtuCrossView),
            other => Err(format!("unknown protocol `{other}`")),
        }
    }
}

/// One indexed sequence: where it lives and how it is labeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub path: PathBuf,
    /// 0-based action class id.
    pub label: u32,
    pub subject_id: u32,
    pub camera_id: Option<u32>,
}

/// A protocol split over a set of entries.
///
/// `train` and `test` hold indices into `entries`; entries admitted by the
/// protocol land in exactly one of the two.
#[derive(Debug, Clone)]
pub struct DatasetIndex {
    pub entries: Vec<Entry>,
    pub protocol: Protocol,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// MSR Action3D training subjects; the remaining five are the test set.
pub const MSR_TRAIN_SUBJECTS: [u32; 5] = [1, 3, 5, 7, 9];

/// The three 8-class MSR subsets, as 0-based ids into the canonical
/// 20-action list (0 = high arm wave .. 19 = pickup & throw).
pub const MSR_AS1_LABELS: [u32; 8] = [1, 2, 4, 5, 9, 12, 17, 19];
pub const MSR_AS2_LABELS: [u32; 8] = [0, 3, 6, 7, 8, 10, 11, 13];
pub const MSR_AS3_LABELS: [u32; 8] = [5, 13, 14, 15, 16, 17, 18, 19];

/// NTU cross-subject training performers.
pub const NTU_TRAIN_SUBJECTS: [u32; 20] = [
    1, 2, 4, 5, 8, 9, 13, 14, 15, 16, 17, 18, 19, 25, 27, 28, 31, 34, 35, 38,
];

fn msr_subset_labels(protocol: Protocol) -> &'static [u32] {
    match protocol {
        Protocol::As1 => &MSR_AS1_LABELS,
        Protocol::As2 => &MSR_AS2_LABELS,
        Protocol::As3 => &MSR_AS3_LABELS,
        _ => unreachable!("not an MSR subset"),
    }
}

/// Split MSR Action3D entries by subject id for one of the AS subsets.
///
/// Entries whose label is outside the subset's 8-class list are excluded.
pub fn build_msr_split(entries: Vec<Entry>, subset: Protocol) -> Result<DatasetIndex> {
    assert!(
        matches!(subset, Protocol::As1 | Protocol::As2 | Protocol::As3),
        "build_msr_split takes an AS subset"
    );
    let admitted: BTreeSet<u32> = msr_subset_labels(subset).iter().copied().collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        if !(1..=10).contains(&e.subject_id) {
            return Err(Error::BadSubjectId(e.subject_id));
        }
        if !admitted.contains(&e.label) {
            continue;
        }
        if MSR_TRAIN_SUBJECTS.contains(&e.subject_id) {
            train.push(i);
        } else {
            test.push(i);
        }
    }
    Ok(DatasetIndex {
        entries,
        protocol: subset,
        train,
        test,
    })
}

/// Split NTU RGB+D entries by performer (cross-subject) or camera (cross-view).
pub fn build_ntu_split(entries: Vec<Entry>, mode: Protocol) -> Result<DatasetIndex> {
    assert!(
        matches!(mode, Protocol::NtuCrossSubject | Protocol::NtuCrossView),
        "build_ntu_split takes an NTU protocol"
    );
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        let is_train = match mode {
            Protocol::NtuCrossSubject => NTU_TRAIN_SUBJECTS.contains(&e.subject_id),
            Protocol::NtuCrossView => match e.camera_id {
                Some(2) | Some(3) => true,
                Some(1) => false,
                other => return Err(Error::BadCameraId(other)),
            },
            _ => unreachable!(),
        };
        if is_train {
            train.push(i);
        } else {
            test.push(i);
        }
    }
    Ok(DatasetIndex {
        entries,
        protocol: mode,
        train,
        test,
    })
}

/// Dispatch to the right split builder for the protocol.
pub fn build_split(entries: Vec<Entry>, protocol: Protocol) -> Result<DatasetIndex> {
    match protocol {
        Protocol::As1 | Protocol::As2 | Protocol::As3 => build_msr_split(entries, protocol),
        Protocol::NtuCrossSubject | Protocol::NtuCrossView => build_ntu_split(entries, protocol),
    }
}

impl DatasetIndex {
    /// Number of distinct classes among admitted entries.
    pub fn class_count(&self) -> usize {
        self.train
            .iter()
            .chain(self.test.iter())
            .map(|&i| self.entries[i].label)
            .max()
            .map(|m| m as usize + 1)
            .unwrap_or(0)
    }
}
