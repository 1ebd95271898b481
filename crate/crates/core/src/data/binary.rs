//! Binary layout (all little-endian):
//!
//! ```text
//! "NNKD" | u32 version | u32 N | u32 d | u32 C | N*d f32 | N u32 labels | N u64 ids
//! ```

use std::fs;
use std::path::Path;

use super::{EmbeddingSet, LabeledDataset};
use crate::error::{NnkError, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"NNKD";
pub const BINARY_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 * 4;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const W: usize>(&mut self, what: &str) -> Result<[u8; W]> {
        let bytes = self
            .buf
            .get(self.pos..self.pos + W)
            .ok_or_else(|| NnkError::Header(format!("truncated file while reading {what}")))?;
        self.pos += W;
        Ok(bytes.try_into().expect("slice length is W"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }
}

pub fn read_binary(path: &Path) -> Result<LabeledDataset> {
    let buf = fs::read(path).map_err(|e| NnkError::io(path, e))?;
    let mut r = Reader { buf: &buf, pos: 0 };

    if &r.take::<4>("magic")? != BINARY_MAGIC {
        return Err(NnkError::Header("bad magic, expected `NNKD`".into()));
    }
    let version = r.u32("version")?;
    if version != BINARY_VERSION {
        return Err(NnkError::Header(format!("unsupported version {version}")));
    }
    let n = r.u32("N")? as usize;
    let dim = r.u32("d")? as usize;
    let num_classes = r.u32("C")?;

    let expected = HEADER_LEN + n * dim * 4 + n * 4 + n * 8;
    if buf.len() != expected {
        return Err(NnkError::Header(format!(
            "file holds {} bytes, header implies {expected}",
            buf.len()
        )));
    }

    let mut values = Vec::with_capacity(n * dim);
    for i in 0..n * dim {
        let v = f32::from_le_bytes(r.take::<4>("embeddings")?);
        if !v.is_finite() {
            return Err(NnkError::NonFinite {
                row: i / dim,
                column: i % dim,
            });
        }
        values.push(v);
    }
    let mut labels = Vec::with_capacity(n);
    for row in 0..n {
        let label = r.u32("labels")?;
        if label >= num_classes {
            return Err(NnkError::LabelOutOfRange {
                row,
                label,
                num_classes,
            });
        }
        labels.push(label);
    }
    let mut ids = Vec::with_capacity(n);
    for _ in 0..n {
        ids.push(u64::from_le_bytes(r.take::<8>("ids")?));
    }

    LabeledDataset::new(EmbeddingSet::new(ids, dim, values)?, labels, num_classes)
}

pub fn write_binary(path: &Path, dataset: &LabeledDataset) -> Result<()> {
    let n = dataset.len();
    let dim = dataset.dim();
    let mut buf = Vec::with_capacity(HEADER_LEN + n * dim * 4 + n * 12);
    buf.extend_from_slice(BINARY_MAGIC);
    for field in [BINARY_VERSION, n as u32, dim as u32, dataset.num_classes()] {
        buf.extend_from_slice(&field.to_le_bytes());
    }
    for v in dataset.points().values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for l in dataset.labels() {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    for id in dataset.points().ids() {
        buf.extend_from_slice(&id.to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| NnkError::io(path, e))
}
