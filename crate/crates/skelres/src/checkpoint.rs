//! Versioned binary checkpoints.
//!
//! Layout (little-endian): magic `SKRN`, format version u32, depth u32,
//! class count u32, input joint count u32, epoch u32, seed u64, record
//! count u32, then one record per state tensor in network state order:
//! name (u16 length + UTF-8 bytes), dtype tag u8 (0 = f32, 1 = f64),
//! rank u8, dims u32 each, raw element bytes. Reload is bit-exact.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{Network, NetworkSpec, StateMut};
use crate::rng::RngState;
use crate::tensor::Scalar;

pub const MAGIC: [u8; 4] = *b"SKRN";
pub const FORMAT_VERSION: u32 = 1;

/// Training metadata carried alongside the weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckpointMeta {
    pub epoch: u32,
    pub seed: u64,
    /// Joint count of the topology the training images were encoded from;
    /// 0 when unknown (e.g. synthetic pipelines).
    pub joint_count: u32,
}

trait CheckpointScalar: Scalar {
    const DTYPE: u8;
    fn write_slice(w: &mut impl Write, data: &[Self]) -> std::io::Result<()>;
    fn read_slice(r: &mut impl Read, out: &mut [Self]) -> std::io::Result<()>;
}

impl CheckpointScalar for f32 {
    const DTYPE: u8 = 0;
    fn write_slice(w: &mut impl Write, data: &[Self]) -> std::io::Result<()> {
        for v in data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
    fn read_slice(r: &mut impl Read, out: &mut [Self]) -> std::io::Result<()> {
        let mut buf = [0u8; 4];
        for v in out {
            r.read_exact(&mut buf)?;
            *v = f32::from_le_bytes(buf);
        }
        Ok(())
    }
}

impl CheckpointScalar for f64 {
    const DTYPE: u8 = 1;
    fn write_slice(w: &mut impl Write, data: &[Self]) -> std::io::Result<()> {
        for v in data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
    fn read_slice(r: &mut impl Read, out: &mut [Self]) -> std::io::Result<()> {
        let mut buf = [0u8; 8];
        for v in out {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        Ok(())
    }
}

fn write_u32(w: &mut impl Write, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::BadCheckpoint("truncated file".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn save_impl<T: CheckpointScalar>(
    net: &mut Network<T>,
    meta: CheckpointMeta,
    w: &mut impl Write,
) -> Result<()> {
    w.write_all(&MAGIC)?;
    write_u32(w, FORMAT_VERSION)?;
    let spec = net.spec();
    write_u32(w, spec.depth as u32)?;
    write_u32(w, spec.num_classes as u32)?;
    write_u32(w, meta.joint_count)?;
    write_u32(w, meta.epoch)?;
    w.write_all(&meta.seed.to_le_bytes())?;

    let state = net.state_mut();
    write_u32(w, state.len() as u32)?;
    for slot in state {
        let (name, shape, data): (String, Vec<usize>, &[T]) = match slot {
            StateMut::Param { name, param, .. } => {
                (name, param.value.shape().to_vec(), param.value.data())
            }
            StateMut::Buffer { name, buf } => (name, vec![buf.len()], buf.as_slice()),
        };
        let name_bytes = name.as_bytes();
        w.write_all(&(name_bytes.len() as u16).to_le_bytes())?;
        w.write_all(name_bytes)?;
        w.write_all(&[T::DTYPE, shape.len() as u8])?;
        for &d in &shape {
            write_u32(w, d as u32)?;
        }
        T::write_slice(w, data)?;
    }
    Ok(())
}

fn load_impl<T: CheckpointScalar>(r: &mut impl Read) -> Result<(Network<T>, CheckpointMeta)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::BadCheckpoint("truncated file".into()))?;
    if magic != MAGIC {
        return Err(Error::BadCheckpoint("bad magic bytes".into()));
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(Error::BadCheckpoint(format!(
            "format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let depth = read_u32(r)? as usize;
    let num_classes = read_u32(r)? as usize;
    let joint_count = read_u32(r)?;
    let epoch = read_u32(r)?;
    let mut seed_bytes = [0u8; 8];
    r.read_exact(&mut seed_bytes)
        .map_err(|_| Error::BadCheckpoint("truncated file".into()))?;
    let seed = u64::from_le_bytes(seed_bytes);

    let spec = NetworkSpec::new(depth, num_classes)
        .map_err(|e| Error::BadCheckpoint(format!("invalid stored spec: {e}")))?;
    // Freshly initialized weights are fully overwritten below.
    let mut net = Network::build(spec, &mut RngState::seed_from(0))
        .map_err(|e| Error::BadCheckpoint(e.to_string()))?;

    let record_count = read_u32(r)? as usize;
    let state = net.state_mut();
    if record_count != state.len() {
        return Err(Error::BadCheckpoint(format!(
            "{record_count} records, expected {}",
            state.len()
        )));
    }
    for slot in state {
        let mut len_bytes = [0u8; 2];
        r.read_exact(&mut len_bytes)
            .map_err(|_| Error::BadCheckpoint("truncated record".into()))?;
        let mut name_bytes = vec![0u8; u16::from_le_bytes(len_bytes) as usize];
        r.read_exact(&mut name_bytes)
            .map_err(|_| Error::BadCheckpoint("truncated record".into()))?;
        let name = String::from_utf8(name_bytes)
            .map_err(|_| Error::BadCheckpoint("record name is not UTF-8".into()))?;
        let mut tag = [0u8; 2];
        r.read_exact(&mut tag)
            .map_err(|_| Error::BadCheckpoint("truncated record".into()))?;
        if tag[0] != T::DTYPE {
            return Err(Error::BadCheckpoint(format!(
                "record `{name}`: dtype tag {} does not match the requested precision",
                tag[0]
            )));
        }
        let mut shape = Vec::with_capacity(tag[1] as usize);
        for _ in 0..tag[1] {
            shape.push(read_u32(r)? as usize);
        }
        let (want_name, want_shape, data): (&str, Vec<usize>, &mut [T]) = match slot {
            StateMut::Param { ref name, param, .. } => (
                name,
                param.value.shape().to_vec(),
                param.value.data_mut(),
            ),
            StateMut::Buffer { ref name, buf } => (name, vec![buf.len()], buf.as_mut_slice()),
        };
        if name != want_name {
            return Err(Error::BadCheckpoint(format!(
                "record `{name}` out of order, expected `{want_name}`"
            )));
        }
        if shape != want_shape {
            return Err(Error::ShapeMismatch(format!(
                "record `{name}`: stored shape {shape:?}, expected {want_shape:?}"
            )));
        }
        T::read_slice(r, data)
            .map_err(|_| Error::BadCheckpoint(format!("record `{name}`: truncated data")))?;
    }
    Ok((
        net,
        CheckpointMeta {
            epoch,
            seed,
            joint_count,
        },
    ))
}

pub fn save(net: &mut Network<f32>, meta: CheckpointMeta, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    save_impl(net, meta, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(Network<f32>, CheckpointMeta)> {
    let bytes = std::fs::read(path)?;
    load_impl(&mut bytes.as_slice())
}

pub fn save_bytes(net: &mut Network<f32>, meta: CheckpointMeta) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    save_impl(net, meta, &mut buf)?;
    Ok(buf)
}

pub fn load_bytes(bytes: &[u8]) -> Result<(Network<f32>, CheckpointMeta)> {
    load_impl(&mut { bytes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Mode;
    use crate::tensor::Tensor;

    fn random_net(seed: u64) -> Network<f32> {
        let spec = NetworkSpec::new(20, 5).unwrap();
        Network::build(spec, &mut RngState::seed_from(seed)).unwrap()
    }

    fn meta() -> CheckpointMeta {
        CheckpointMeta {
            epoch: 17,
            seed: 99,
            joint_count: 20,
        }
    }

    #[test]
    fn round_trip_reproduces_eval_outputs_bitwise() {
        let mut net = random_net(3);
        let bytes = save_bytes(&mut net, meta()).unwrap();
        let (mut loaded, got_meta) = load_bytes(&bytes).unwrap();
        assert_eq!(got_meta, meta());

        let mut data_rng = RngState::seed_from(4);
        let x = Tensor::from_vec(
            &[2, 3, 32, 32],
            (0..2 * 3 * 32 * 32)
                .map(|_| data_rng.uniform() as f32)
                .collect(),
        );
        let mut rng = RngState::seed_from(0);
        let a = net.forward(&x, Mode::Eval, &mut rng).unwrap();
        let b = loaded.forward(&x, Mode::Eval, &mut rng).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let mut net = random_net(1);
        let mut bytes = save_bytes(&mut net, meta()).unwrap();
        bytes[0] = b'X';
        assert!(matches!(
            load_bytes(&bytes),
            Err(Error::BadCheckpoint(msg)) if msg.contains("magic")
        ));
    }

    #[test]
    fn wrong_version_is_rejected() {
        let mut net = random_net(1);
        let mut bytes = save_bytes(&mut net, meta()).unwrap();
        bytes[4..8].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(load_bytes(&bytes), Err(Error::BadCheckpoint(_))));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let mut net = random_net(1);
        let bytes = save_bytes(&mut net, meta()).unwrap();
        let cut = &bytes[..bytes.len() / 2];
        assert!(matches!(load_bytes(cut), Err(Error::BadCheckpoint(_))));
    }

    #[test]
    fn stored_shape_conflict_is_rejected() {
        let mut net = random_net(1);
        let mut bytes = save_bytes(&mut net, meta()).unwrap();
        // Rewrite the stored depth so the expected shapes no longer match
        // the recorded tensors.
        bytes[8..12].copy_from_slice(&32u32.to_le_bytes());
        let err = match load_bytes(&bytes) {
            Err(e) => e,
            Ok(_) => panic!("tampered depth was accepted"),
        };
        assert!(
            matches!(err, Error::BadCheckpoint(_) | Error::ShapeMismatch(_)),
            "{err}"
        );
    }
}
