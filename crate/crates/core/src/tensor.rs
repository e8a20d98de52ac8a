//! Tensor interchange files.
//!
//! RTEN: `"RTEN1"`, u8 dtype (0 f32, 1 f64), u8 ndim, ndim x u32 dims, then
//! the payload in row-major order, all little-endian.
//!
//! REMB: `"REMB1"`, u32 d_R, u64 count, then per row u32 x, u32 y and
//! d_R x f32.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::codec::{write_atomic, Reader};
use crate::error::{Error, Result};
use crate::geo::TileCoord;
use crate::summary::ReachabilityMap;

pub const RTEN_MAGIC: &[u8; 5] = b"RTEN1";
pub const REMB_MAGIC: &[u8; 5] = b"REMB1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    F32,
    F64,
}

impl DType {
    fn tag(self) -> u8 {
        match self {
            DType::F32 => 0,
            DType::F64 => 1,
        }
    }

    fn width(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F64 => 8,
        }
    }
}

/// Dense row-major tensor. Values are held as `f64` whatever the on-disk
/// type.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub dtype: DType,
    pub dims: Vec<u32>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(dtype: DType, dims: Vec<u32>, data: Vec<f64>) -> Result<Self> {
        let expected = dims.iter().map(|&d| d as usize).product::<usize>();
        if dims.is_empty() || dims.len() > usize::from(u8::MAX) {
            return Err(Error::InvalidParameter(format!("unsupported rank {}", dims.len())));
        }
        if expected != data.len() {
            return Err(Error::DimensionMismatch {
                expected,
                found: data.len(),
            });
        }
        Ok(Tensor { dtype, dims, data })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(7 + 4 * self.dims.len() + self.data.len() * self.dtype.width());
        out.extend_from_slice(RTEN_MAGIC);
        out.push(self.dtype.tag());
        out.push(self.dims.len() as u8);
        for d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        match self.dtype {
            DType::F32 => {
                for &v in &self.data {
                    out.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
            DType::F64 => {
                for &v in &self.data {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let magic = r.take(5)?;
        if &magic[..4] != b"RTEN" {
            return Err(Error::format(0, "bad magic, not an RTEN file"));
        }
        if magic[4] != b'1' {
            return Err(Error::format(4, format!("unsupported RTEN version {:?}", magic[4] as char)));
        }
        let dtype = match r.u8()? {
            0 => DType::F32,
            1 => DType::F64,
            other => return Err(Error::format(5, format!("unknown dtype {other}"))),
        };
        let ndim = r.u8()?;
        if ndim == 0 {
            return Err(Error::format(6, "zero-rank tensor"));
        }
        let dims = (0..ndim).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
            .ok_or_else(|| Error::format(7, "dimension product overflows"))?;
        let payload_at = r.offset();
        let remaining = bytes.len() as u64 - payload_at;
        if remaining != (count as u64) * dtype.width() as u64 {
            return Err(Error::format(
                payload_at,
                format!(
                    "payload holds {remaining} bytes, dims {dims:?} need {}",
                    count as u64 * dtype.width() as u64
                ),
            ));
        }
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            data.push(match dtype {
                DType::F32 => f64::from(r.f32()?),
                DType::F64 => r.f64()?,
            });
        }
        Ok(Tensor { dtype, dims, data })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.encode())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }
}

/// `foo.rten` -> `foo.rten.idx`.
pub fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes dense summaries of `nodes` (all active tiles when `None`) as an
/// `(count, L, L, 2)` f64 tensor plus an `.idx` sidecar of `x,y` lines in
/// the same order. Returns the node order used.
pub fn export_dense_tensors(
    map: &ReachabilityMap,
    nodes: Option<&[TileCoord]>,
    path: impl AsRef<Path>,
) -> Result<Vec<TileCoord>> {
    let order: Vec<TileCoord> = match nodes {
        Some(n) => n.to_vec(),
        None => map.active_tiles().collect(),
    };
    let side = map.params.side();
    let mut data = Vec::with_capacity(order.len() * side * side * 2);
    let mut index = String::new();
    for &tile in &order {
        data.extend_from_slice(map.densify(tile)?.data());
        writeln!(index, "{},{}", tile.x, tile.y).expect("string write");
    }
    let dims = vec![order.len() as u32, side as u32, side as u32, 2];
    let tensor = Tensor::new(DType::F64, dims, data)?;
    let path = path.as_ref();
    tensor.write(path)?;
    write_atomic(&sidecar_path(path, "idx"), index.as_bytes())?;
    Ok(order)
}

/// Reads an `.idx` sidecar back into tiles at zoom `q`.
pub fn read_index_sidecar(path: impl AsRef<Path>, q: u8) -> Result<Vec<TileCoord>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    let mut offset = 0u64;
    for line in text.lines() {
        let parsed = line
            .split_once(',')
            .and_then(|(x, y)| Some((x.trim().parse().ok()?, y.trim().parse().ok()?)));
        match parsed {
            Some((x, y)) => out.push(TileCoord::new(q, x, y)?),
            None => return Err(Error::format(offset, format!("bad index line {line:?}"))),
        }
        offset += line.len() as u64 + 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRow {
    pub x: u32,
    pub y: u32,
    pub vector: Vec<f32>,
}

/// Per-tile embedding vectors as produced by the trainer.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub d_r: u32,
    pub rows: Vec<EmbeddingRow>,
}

impl EmbeddingTable {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(17 + self.rows.len() * (8 + 4 * self.d_r as usize));
        out.extend_from_slice(REMB_MAGIC);
        out.extend_from_slice(&self.d_r.to_le_bytes());
        out.extend_from_slice(&(self.rows.len() as u64).to_le_bytes());
        for row in &self.rows {
            out.extend_from_slice(&row.x.to_le_bytes());
            out.extend_from_slice(&row.y.to_le_bytes());
            for v in &row.vector {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let magic = r.take(5)?;
        if &magic[..4] != b"REMB" {
            return Err(Error::format(0, "bad magic, not a REMB file"));
        }
        if magic[4] != b'1' {
            return Err(Error::format(4, format!("unsupported REMB version {:?}", magic[4] as char)));
        }
        let d_r = r.u32()?;
        let count = r.u64()?;
        let mut rows = Vec::new();
        for _ in 0..count {
            let x = r.u32()?;
            let y = r.u32()?;
            let vector = (0..d_r).map(|_| r.f32()).collect::<Result<Vec<_>>>()?;
            rows.push(EmbeddingRow { x, y, vector });
        }
        if !r.is_empty() {
            return Err(Error::format(r.offset(), "trailing bytes after last row"));
        }
        Ok(EmbeddingTable { d_r, rows })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.encode())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::{NodeChannels, Provenance};
    use crate::transition::SummaryParams;

    #[test]
    fn rten_layout() {
        let t = Tensor::new(DType::F32, vec![1, 2], vec![1.0, 2.5]).unwrap();
        let bytes = t.encode();
        assert_eq!(&bytes[..5], b"RTEN1");
        assert_eq!(bytes[5], 0);
        assert_eq!(bytes[6], 2);
        assert_eq!(bytes.len(), 7 + 8 + 8);
        assert_eq!(Tensor::decode(&bytes).unwrap(), t);
    }

    #[test]
    fn rten_rejects_short_payload() {
        let bytes = Tensor::new(DType::F64, vec![3], vec![1.0, 2.0, 3.0]).unwrap().encode();
        assert!(matches!(
            Tensor::decode(&bytes[..bytes.len() - 1]),
            Err(Error::Format { offset: 11, .. })
        ));
    }

    #[test]
    fn dims_must_match_data() {
        assert!(Tensor::new(DType::F64, vec![2, 2], vec![0.0; 3]).is_err());
    }

    #[test]
    fn export_single_node() {
        let params = SummaryParams::unit(24, 1).unwrap();
        let mut map = ReachabilityMap::new(params, Provenance::default());
        let mut ch = NodeChannels::default();
        ch.emission.add(4, 2.0);
        ch.absorption.add(4, 2.0);
        let tile = TileCoord::new(24, 11, 12).unwrap();
        map.insert(tile, ch);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.rten");
        export_dense_tensors(&map, None, &path).unwrap();
        let t = Tensor::read(&path).unwrap();
        assert_eq!(t.dims, vec![1, 3, 3, 2]);
        assert_eq!(t.data.len(), 18);
        assert_eq!(t.data, map.densify(tile).unwrap().data());
        let idx = read_index_sidecar(sidecar_path(&path, "idx"), 24).unwrap();
        assert_eq!(idx, vec![tile]);
    }

    #[test]
    fn export_rejects_inactive_node() {
        let params = SummaryParams::unit(24, 1).unwrap();
        let map = ReachabilityMap::new(params, Provenance::default());
        let dir = tempfile::tempdir().unwrap();
        let tile = TileCoord::new(24, 1, 1).unwrap();
        assert!(export_dense_tensors(&map, Some(&[tile]), dir.path().join("x.rten")).is_err());
    }

    #[test]
    fn remb_round_trip() {
        let table = EmbeddingTable {
            d_r: 2,
            rows: vec![
                EmbeddingRow { x: 1, y: 2, vector: vec![0.5, 0.0] },
                EmbeddingRow { x: 3, y: 2, vector: vec![1.0, 2.0] },
            ],
        };
        let bytes = table.encode();
        assert_eq!(bytes.len(), 17 + 2 * 16);
        assert_eq!(EmbeddingTable::decode(&bytes).unwrap(), table);
    }
}
