//! The reachability map: per active tile, sparse emission and absorption
//! channels, and their dense `L x L x 2` summaries.

mod engine;
mod reference;
mod rsum;

use std::collections::btree_map::{self, BTreeMap};

use crate::error::{Error, Result};
use crate::geo::TileCoord;
use crate::transition::{inverse_index, mirror_index, Flag, SummaryParams};

pub use self::engine::build_reachability_map;
pub use self::reference::brute_force_reference;
pub use self::rsum::{decode_rsum, encode_rsum, read_rsum, write_rsum, RSUM_MAGIC};

/// Row-major index to accumulated count. Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseChannel {
    entries: BTreeMap<u32, f64>,
}

impl SparseChannel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, idx: u32, count: f64) {
        if count == 0.0 {
            return;
        }
        *self.entries.entry(idx).or_insert(0.0) += count;
    }

    pub fn get(&self, idx: u32) -> f64 {
        self.entries.get(&idx).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.entries.values().sum()
    }
}

impl FromIterator<(u32, f64)> for SparseChannel {
    fn from_iter<I: IntoIterator<Item = (u32, f64)>>(iter: I) -> Self {
        let mut ch = SparseChannel::new();
        for (idx, c) in iter {
            ch.add(idx, c);
        }
        ch
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeChannels {
    /// Transitions into the node, keyed by the source's position.
    pub emission: SparseChannel,
    /// Transitions out of the node, keyed by the destination's position.
    pub absorption: SparseChannel,
}

impl NodeChannels {
    pub fn channel(&self, flag: Flag) -> &SparseChannel {
        match flag {
            Flag::Emission => &self.emission,
            Flag::Absorption => &self.absorption,
        }
    }

    pub fn channel_mut(&mut self, flag: Flag) -> &mut SparseChannel {
        match flag {
            Flag::Emission => &mut self.emission,
            Flag::Absorption => &mut self.absorption,
        }
    }
}

/// Observation interval the map was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Provenance {
    pub t0: i64,
    pub dt: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityMap {
    pub params: SummaryParams,
    pub provenance: Provenance,
    nodes: BTreeMap<TileCoord, NodeChannels>,
}

impl ReachabilityMap {
    pub fn new(params: SummaryParams, provenance: Provenance) -> Self {
        ReachabilityMap {
            params,
            provenance,
            nodes: BTreeMap::new(),
        }
    }

    pub(crate) fn from_nodes(
        params: SummaryParams,
        provenance: Provenance,
        nodes: BTreeMap<TileCoord, NodeChannels>,
    ) -> Self {
        ReachabilityMap {
            params,
            provenance,
            nodes,
        }
    }

    pub fn insert(&mut self, node: TileCoord, channels: NodeChannels) {
        self.nodes.insert(node, channels);
    }

    pub fn node(&self, tile: &TileCoord) -> Option<&NodeChannels> {
        self.nodes.get(tile)
    }

    pub fn contains(&self, tile: &TileCoord) -> bool {
        self.nodes.contains_key(tile)
    }

    /// Active tiles in `(y, x)` order.
    pub fn active_tiles(&self) -> impl Iterator<Item = TileCoord> + '_ {
        self.nodes.keys().copied()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, TileCoord, NodeChannels> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self, flag: Flag) -> f64 {
        self.nodes.values().map(|n| n.channel(flag).sum()).sum()
    }

    /// Checks that every off-center absorption entry of `s` toward `s'`
    /// appears with the same count as the mirrored emission entry of `s'`,
    /// and vice versa. Returns a description of the first violation.
    pub fn check_duality(&self) -> std::result::Result<(), String> {
        let delta_r = self.params.delta_r;
        let center = self.params.center_index();
        for (&node, ch) in &self.nodes {
            for (flag, other) in [
                (Flag::Absorption, Flag::Emission),
                (Flag::Emission, Flag::Absorption),
            ] {
                for (idx, count) in ch.channel(flag).iter() {
                    if idx == center {
                        continue;
                    }
                    let (dx, dy) = inverse_index(idx, delta_r).map_err(|e| e.to_string())?;
                    let peer = node
                        .offset_by(dx, dy)
                        .and_then(|t| self.nodes.get(&t).map(|p| (t, p)));
                    let Some((peer_tile, peer)) = peer else {
                        return Err(format!("{node}: {flag:?}[{idx}] points at an inactive tile"));
                    };
                    let mirrored = peer.channel(other).get(mirror_index(idx, delta_r));
                    if mirrored != count {
                        return Err(format!(
                            "{node}: {flag:?}[{idx}] = {count} but {peer_tile} {other:?} = {mirrored}"
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn densify(&self, node: TileCoord) -> Result<DenseSummary> {
        let ch = self.nodes.get(&node).ok_or(Error::NotFound {
            q: node.q,
            x: node.x,
            y: node.y,
        })?;
        Ok(DenseSummary::from_channels(node, self.params.delta_r, ch))
    }

    /// Like [`densify`](Self::densify) but inactive tiles give the all-zero
    /// summary.
    pub fn densify_or_zero(&self, node: TileCoord) -> DenseSummary {
        match self.nodes.get(&node) {
            Some(ch) => DenseSummary::from_channels(node, self.params.delta_r, ch),
            None => DenseSummary::zeros(node, self.params.delta_r),
        }
    }
}

/// `L x L x 2` summary of one node. Channel 0 is emission, channel 1
/// absorption; rows follow the `y` offset and columns the `x` offset.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSummary {
    pub node: TileCoord,
    pub delta_r: u32,
    data: Vec<f64>,
}

impl DenseSummary {
    pub fn zeros(node: TileCoord, delta_r: u32) -> Self {
        let l = 2 * delta_r as usize + 1;
        DenseSummary {
            node,
            delta_r,
            data: vec![0.0; l * l * 2],
        }
    }

    pub fn from_channels(node: TileCoord, delta_r: u32, ch: &NodeChannels) -> Self {
        let mut out = Self::zeros(node, delta_r);
        for (c, flag) in [Flag::Emission, Flag::Absorption].into_iter().enumerate() {
            for (idx, count) in ch.channel(flag).iter() {
                out.data[idx as usize * 2 + c] = count;
            }
        }
        out
    }

    pub fn from_data(node: TileCoord, delta_r: u32, data: Vec<f64>) -> Result<Self> {
        let l = 2 * delta_r as usize + 1;
        if data.len() != l * l * 2 {
            return Err(Error::DimensionMismatch {
                expected: l * l * 2,
                found: data.len(),
            });
        }
        Ok(DenseSummary {
            node,
            delta_r,
            data,
        })
    }

    pub fn side(&self) -> usize {
        2 * self.delta_r as usize + 1
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.side() + col) * 2 + channel]
    }

    /// Flat `(L, L, 2)` row-major values.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn channel_sum(&self, channel: usize) -> f64 {
        self.data.iter().skip(channel).step_by(2).sum()
    }

    /// Back to sparse channels, dropping zeros.
    pub fn to_channels(&self) -> NodeChannels {
        let mut ch = NodeChannels::default();
        for (i, pair) in self.data.chunks_exact(2).enumerate() {
            ch.emission.add(i as u32, pair[0]);
            ch.absorption.add(i as u32, pair[1]);
        }
        ch
    }
}
