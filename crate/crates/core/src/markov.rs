//! Transition-probability view of the tile graph and a Chapman-Kolmogorov
//! consistency check of the emission/absorption channels.
//!
//! For a row-stochastic `P`, summing the two-step matrix over all entries
//! gives `sum_{s', s''} (P^2)[s', s''] = sum_z (sum_{s'} P[s', z]) (sum_{s''} P[z, s''])`.
//! The left side is computed from the dense matrix; the right side only from
//! each node's channels, with emission entries divided by the row mass of
//! the node they came from. Agreement checks that the channels are a
//! faithful rearrangement of the rows and columns of `P`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geo::TileCoord;
use crate::summary::ReachabilityMap;
use crate::trajectory::TrajectorySet;
use crate::transition::{for_each_contribution, inverse_index, Flag, SummaryParams};

/// Largest number of active tiles the dense verifier accepts.
pub const DENSE_LIMIT: usize = 5000;

/// Pass threshold for the absolute residual.
pub const CKE_TOLERANCE: f64 = 1e-9;

/// Active tiles in `(y, x)` order and their dense positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveIndex {
    tiles: Vec<TileCoord>,
}

impl ActiveIndex {
    pub fn new(mut tiles: Vec<TileCoord>) -> Self {
        tiles.sort_unstable();
        tiles.dedup();
        ActiveIndex { tiles }
    }

    pub fn position(&self, tile: &TileCoord) -> Option<usize> {
        self.tiles.binary_search(tile).ok()
    }

    pub fn tile(&self, i: usize) -> TileCoord {
        self.tiles[i]
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }
}

/// Dense row-major `n x n` matrix; rows with outgoing mass sum to one,
/// rows without stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    /// Normalizes each row of a non-negative weight matrix by its sum.
    pub fn from_weights(n: usize, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: weights.len(),
            });
        }
        if let Some(bad) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Domain(format!("transition weight {bad}")));
        }
        for row in weights.chunks_exact_mut(n.max(1)) {
            let z: f64 = row.iter().sum();
            if z > 0.0 {
                row.iter_mut().for_each(|w| *w /= z);
            }
        }
        Ok(TransitionMatrix { n, data: weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Two-step matrix by direct triple loop.
    pub fn square(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * self.get(k, j);
                }
            }
        }
        out
    }
}

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            nodes: n,
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

/// Weight matrix `W[src, dst]` scattered back from absorption channels.
pub fn weight_matrix(map: &ReachabilityMap) -> Result<(ActiveIndex, Vec<f64>)> {
    let index = ActiveIndex::new(map.active_tiles().collect());
    let n = index.len();
    check_dense(n)?;
    let mut w = vec![0.0; n * n];
    for (i, (tile, ch)) in map.iter().enumerate() {
        for (idx, count) in ch.absorption.iter() {
            let (dx, dy) = inverse_index(idx, map.params.delta_r)?;
            let j = tile
                .offset_by(dx, dy)
                .and_then(|t| index.position(&t))
                .ok_or_else(|| Error::Domain(format!("{tile} transitions to an inactive tile")))?;
            w[i * n + j] += count;
        }
    }
    Ok((index, w))
}

pub fn build_transition_matrix(map: &ReachabilityMap) -> Result<(ActiveIndex, TransitionMatrix)> {
    let (index, w) = weight_matrix(map)?;
    let n = index.len();
    Ok((index, TransitionMatrix::from_weights(n, w)?))
}

/// Transition weight of every valid `(src, dst)` pair, accumulated straight
/// from the trajectories.
pub fn pair_weights(set: &TrajectorySet, params: &SummaryParams) -> BTreeMap<(TileCoord, TileCoord), f64> {
    let mut out = BTreeMap::new();
    for traj in &set.trajectories {
        let mut pending: Option<TileCoord> = None;
        for_each_contribution(traj, params, |c| match c.flag {
            // each absorption is immediately followed by its emission twin
            Flag::Absorption => pending = Some(c.node),
            Flag::Emission => {
                let src = pending.take().expect("absorption precedes emission");
                *out.entry((src, c.node)).or_insert(0.0) += c.count;
            }
        });
    }
    out
}

pub fn transition_matrix_from_pairs(
    pairs: &BTreeMap<(TileCoord, TileCoord), f64>,
) -> Result<(ActiveIndex, TransitionMatrix)> {
    let index = ActiveIndex::new(pairs.keys().flat_map(|&(a, b)| [a, b]).collect());
    let n = index.len();
    check_dense(n)?;
    let mut w = vec![0.0; n * n];
    for (&(a, b), &c) in pairs {
        let i = index.position(&a).expect("indexed above");
        let j = index.position(&b).expect("indexed above");
        w[i * n + j] += c;
    }
    Ok((index, TransitionMatrix::from_weights(n, w)?))
}

/// `X / sum(X)`.
pub fn scale(x: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = x.iter().sum();
    if total.is_nan() || total <= 0.0 || total.is_infinite() {
        return Err(Error::Domain(format!("cannot scale a matrix summing to {total}")));
    }
    Ok(x.iter().map(|v| v / total).collect())
}

/// Share of the two-step probability `from -> to` routed through `via`:
/// `P[from, via] * P[via, to]`.
pub fn contribution(p: &TransitionMatrix, via: usize, from: usize, to: usize) -> Result<f64> {
    for i in [via, from, to] {
        if i >= p.n() {
            return Err(Error::IndexRange { index: i, len: p.n() });
        }
    }
    Ok(p.get(from, via) * p.get(via, to))
}

/// Whether the neighborhood used to build a map saw every pair of records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Full,
    Truncated { dropped_pairs: u64 },
    /// Built elsewhere; assumed complete.
    Unknown,
}

/// Smallest radius under which no record pair of any trajectory is dropped.
pub fn required_delta_r(set: &TrajectorySet) -> u32 {
    set.trajectories
        .iter()
        .filter(|t| !t.is_empty())
        .map(|t| {
            let xs = t.points.iter().map(|p| p.tile.x);
            let ys = t.points.iter().map(|p| p.tile.y);
            let dx = xs.clone().max().unwrap() - xs.min().unwrap();
            let dy = ys.clone().max().unwrap() - ys.min().unwrap();
            dx.max(dy)
        })
        .max()
        .unwrap_or(0)
}

pub fn neighborhood_coverage(set: &TrajectorySet, delta_r: u32) -> Coverage {
    let mut dropped = 0u64;
    for t in &set.trajectories {
        for (k, a) in t.points.iter().enumerate() {
            for b in &t.points[k + 1..] {
                if a.tile.x.abs_diff(b.tile.x) > delta_r || a.tile.y.abs_diff(b.tile.y) > delta_r {
                    dropped += 1;
                }
            }
        }
    }
    if dropped == 0 {
        Coverage::Full
    } else {
        Coverage::Truncated {
            dropped_pairs: dropped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CkeStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for CkeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CkeStatus::Pass => "pass",
            CkeStatus::Fail => "fail",
            CkeStatus::NotApplicable => "not-applicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CkeReport {
    pub nodes: usize,
    /// Sum of all entries of the two-step matrix.
    pub lhs: f64,
    /// Sum over nodes of (incoming probability mass) x (outgoing mass),
    /// from the channels.
    pub rhs: f64,
    pub residual: f64,
    /// Right side with each node's term weighted by its raw incoming and
    /// outgoing transition counts.
    pub nu_scaled_rhs: f64,
    pub coverage: Coverage,
    pub status: CkeStatus,
}

impl fmt::Display for CkeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Chapman-Kolmogorov check over {} active tiles", self.nodes)?;
        match self.coverage {
            Coverage::Full => writeln!(f, "coverage=full")?,
            Coverage::Unknown => writeln!(f, "coverage=assumed")?,
            Coverage::Truncated { dropped_pairs } => {
                writeln!(f, "coverage=truncated ({dropped_pairs} pairs outside the neighborhood)")?
            }
        }
        writeln!(f, "nodes={}", self.nodes)?;
        writeln!(f, "lhs={:.17e}", self.lhs)?;
        writeln!(f, "rhs={:.17e}", self.rhs)?;
        writeln!(f, "residual={:.3e}", self.residual)?;
        writeln!(f, "nu_scaled_rhs={:.17e}", self.nu_scaled_rhs)?;
        write!(f, "status={}", self.status)
    }
}

pub fn cke_verify(map: &ReachabilityMap, coverage: Coverage) -> Result<CkeReport> {
    if map.is_empty() {
        return Err(Error::InvalidParameter("cannot verify an empty map".into()));
    }
    let (index, p) = build_transition_matrix(map)?;
    let n = index.len();

    let out_mass: Vec<f64> = (0..n).map(|i| p.row(i).iter().sum()).collect();
    let lhs: f64 = (0..n)
        .map(|i| p.row(i).iter().zip(&out_mass).map(|(a, r)| a * r).sum::<f64>())
        .sum();

    let delta_r = map.params.delta_r;
    let row_mass: BTreeMap<TileCoord, f64> = map
        .iter()
        .map(|(&t, ch)| (t, ch.absorption.sum()))
        .collect();
    let mut rhs = 0.0;
    let mut nu_scaled = 0.0;
    for (&tile, ch) in map.iter() {
        let mut incoming = 0.0;
        for (idx, count) in ch.emission.iter() {
            let (dx, dy) = inverse_index(idx, delta_r)?;
            let src = tile
                .offset_by(dx, dy)
                .ok_or_else(|| Error::Domain(format!("{tile} emission from off-grid tile")))?;
            let z = row_mass.get(&src).copied().unwrap_or(0.0);
            if z > 0.0 {
                incoming += count / z;
            }
        }
        let z_self = ch.absorption.sum();
        let outgoing: f64 = if z_self > 0.0 {
            ch.absorption.iter().map(|(_, c)| c / z_self).sum()
        } else {
            0.0
        };
        rhs += incoming * outgoing;
        nu_scaled += ch.emission.sum() * z_self * incoming * outgoing;
    }

    let residual = (lhs - rhs).abs();
    let status = match coverage {
        Coverage::Truncated { .. } => CkeStatus::NotApplicable,
        _ if residual < CKE_TOLERANCE => CkeStatus::Pass,
        _ => CkeStatus::Fail,
    };
    Ok(CkeReport {
        nodes: n,
        lhs,
        rhs,
        residual,
        nu_scaled_rhs: nu_scaled,
        coverage,
        status,
    })
}
