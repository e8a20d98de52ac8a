//! RSUM: canonical little-endian serialization of a reachability map.
//!
//! ```text
//! "RSUM1" u32 q, u32 delta_r, u8 weighting (0 unit, 1 gaussian),
//! f64 sigma_d, f64 sigma_t, i64 t0, i64 dt, u64 node_count,
//! per node (sorted by y, x):
//!   u32 x, u32 y, u32 nnz_e, nnz_e x (u32 idx, f64 count),
//!   u32 nnz_a, nnz_a x (u32 idx, f64 count)
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use super::{NodeChannels, Provenance, ReachabilityMap, SparseChannel};
use crate::codec::{write_atomic, Reader};
use crate::error::{Error, Result};
use crate::geo::{grid_size, TileCoord};
use crate::transition::{SummaryParams, Weighting};

pub const RSUM_MAGIC: &[u8; 5] = b"RSUM1";

pub fn encode_rsum(map: &ReachabilityMap) -> Vec<u8> {
    let p = &map.params;
    let mut out = Vec::with_capacity(64 + map.len() * 64);
    out.extend_from_slice(RSUM_MAGIC);
    out.extend_from_slice(&u32::from(p.q).to_le_bytes());
    out.extend_from_slice(&p.delta_r.to_le_bytes());
    let (tag, sd, st) = match p.weighting {
        Weighting::Unit => (0u8, 0.0f64, 0.0f64),
        Weighting::Gaussian { sigma_d, sigma_t } => (1, sigma_d, sigma_t),
    };
    out.push(tag);
    out.extend_from_slice(&sd.to_le_bytes());
    out.extend_from_slice(&st.to_le_bytes());
    out.extend_from_slice(&map.provenance.t0.to_le_bytes());
    out.extend_from_slice(&map.provenance.dt.to_le_bytes());
    out.extend_from_slice(&(map.len() as u64).to_le_bytes());
    for (tile, ch) in map.iter() {
        out.extend_from_slice(&tile.x.to_le_bytes());
        out.extend_from_slice(&tile.y.to_le_bytes());
        for channel in [&ch.emission, &ch.absorption] {
            out.extend_from_slice(&(channel.len() as u32).to_le_bytes());
            for (idx, count) in channel.iter() {
                out.extend_from_slice(&idx.to_le_bytes());
                out.extend_from_slice(&count.to_le_bytes());
            }
        }
    }
    out
}

pub fn decode_rsum(bytes: &[u8]) -> Result<ReachabilityMap> {
    let mut r = Reader::new(bytes);
    let magic = r.take(5)?;
    if &magic[..4] != b"RSUM" {
        return Err(Error::format(0, "bad magic, not an RSUM file"));
    }
    if magic[4] != b'1' {
        return Err(Error::format(4, format!("unsupported RSUM version {:?}", magic[4] as char)));
    }
    let at = r.offset();
    let q = r.u32()?;
    let q = u8::try_from(q).map_err(|_| Error::format(at, format!("zoom {q} out of range")))?;
    let at = r.offset();
    let delta_r = r.u32()?;
    let at_w = r.offset();
    let tag = r.u8()?;
    let sigma_d = r.f64()?;
    let sigma_t = r.f64()?;
    let weighting = match tag {
        // unit files carry zero scales so each map has one encoding
        0 if sigma_d == 0.0 && sigma_t == 0.0 => Weighting::Unit,
        0 => return Err(Error::format(at_w + 1, "unit weighting with non-zero scales")),
        1 => Weighting::Gaussian { sigma_d, sigma_t },
        other => return Err(Error::format(at_w, format!("unknown weighting tag {other}"))),
    };
    let params = SummaryParams::new(q, delta_r, weighting).map_err(|e| Error::format(at, e.to_string()))?;
    let t0 = r.i64()?;
    let dt = r.i64()?;
    let count = r.u64()?;
    let n = grid_size(q);
    let cells = params.cells() as u32;
    let mut nodes = BTreeMap::new();
    let mut prev: Option<TileCoord> = None;
    for _ in 0..count {
        let at = r.offset();
        let x = r.u32()?;
        let y = r.u32()?;
        if u64::from(x) >= n || u64::from(y) >= n {
            return Err(Error::format(at, format!("tile ({x}, {y}) outside zoom {q} grid")));
        }
        let tile = TileCoord { q, x, y };
        if prev.is_some_and(|p| p >= tile) {
            return Err(Error::format(at, "nodes not in strictly increasing (y, x) order"));
        }
        prev = Some(tile);
        let emission = read_channel(&mut r, cells)?;
        let absorption = read_channel(&mut r, cells)?;
        nodes.insert(tile, NodeChannels { emission, absorption });
    }
    if !r.is_empty() {
        return Err(Error::format(r.offset(), "trailing bytes after last node"));
    }
    Ok(ReachabilityMap::from_nodes(params, Provenance { t0, dt }, nodes))
}

fn read_channel(r: &mut Reader<'_>, cells: u32) -> Result<SparseChannel> {
    let nnz = r.u32()?;
    let mut ch = SparseChannel::new();
    let mut last: Option<u32> = None;
    for _ in 0..nnz {
        let at = r.offset();
        let idx = r.u32()?;
        let count = r.f64()?;
        if idx >= cells {
            return Err(Error::format(at, format!("index {idx} outside [0, {cells})")));
        }
        if last.is_some_and(|l| l >= idx) {
            return Err(Error::format(at, "channel indices not strictly increasing"));
        }
        if !(count.is_finite() && count > 0.0) {
            return Err(Error::format(at + 4, format!("invalid count {count}")));
        }
        last = Some(idx);
        ch.add(idx, count);
    }
    Ok(ch)
}

/// Writes atomically: on error nothing is left at `path`.
pub fn write_rsum(map: &ReachabilityMap, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_rsum(map))
}

pub fn read_rsum(path: impl AsRef<Path>) -> Result<ReachabilityMap> {
    decode_rsum(&std::fs::read(path)?)
}
