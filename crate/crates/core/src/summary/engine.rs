//! Data-parallel keyed reduction of contributions.
//!
//! Phase one: workers pull batches of whole trajectories from a shared
//! cursor and add their contributions into local hash maps, already split
//! into one shard per worker by node. Phase two: worker `j` folds shard `j`
//! of every partial, in worker order, and turns it into per-node sparse
//! channels. Shards hold disjoint nodes, so the final map is a plain
//! concatenation.

use std::collections::BTreeMap;
use std::hash::BuildHasher;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use rustc_hash::{FxBuildHasher, FxHashMap};

use super::{NodeChannels, Provenance, ReachabilityMap};
use crate::error::{Error, Result};
use crate::geo::TileCoord;
use crate::trajectory::TrajectorySet;
use crate::transition::{for_each_contribution, Flag, SummaryParams};

const BATCH: usize = 32;

/// `(packed node, rm_idx << 1 | absorption)`.
type Key = (u64, u32);
type Partial = FxHashMap<Key, f64>;

fn shard_of(node: u64, shards: usize) -> usize {
    (FxBuildHasher.hash_one(node) % shards as u64) as usize
}

/// Builds the reachability map with `workers` threads.
///
/// Unit-weight results are bit-identical for every worker count; Gaussian
/// results differ only by floating-point summation order.
pub fn build_reachability_map(
    set: &TrajectorySet,
    params: &SummaryParams,
    workers: usize,
) -> Result<ReachabilityMap> {
    if workers < 1 {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    if set.zoom != params.q {
        return Err(Error::ZoomMismatch {
            expected: params.q,
            found: set.zoom,
        });
    }
    let provenance = Provenance {
        t0: set.t0,
        dt: set.dt,
    };
    let trajectories = &set.trajectories;
    let cursor = AtomicUsize::new(0);

    let partials: Vec<Vec<Partial>> = if workers == 1 {
        vec![accumulate(set, params, &cursor, 1)]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|_| scope.spawn(|| accumulate(set, params, &cursor, workers)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("accumulator panicked"))
                .collect()
        })
    };
    debug_assert!(cursor.load(Ordering::Relaxed) >= trajectories.len());

    let shards: Vec<Vec<(TileCoord, NodeChannels)>> = if workers == 1 {
        vec![fold_shard(0, &partials, params.q)]
    } else {
        thread::scope(|scope| {
            let partials = &partials;
            let handles: Vec<_> = (0..workers)
                .map(|j| scope.spawn(move || fold_shard(j, partials, params.q)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("merge worker panicked"))
                .collect()
        })
    };

    let nodes: BTreeMap<TileCoord, NodeChannels> = shards.into_iter().flatten().collect();
    Ok(ReachabilityMap::from_nodes(*params, provenance, nodes))
}

fn accumulate(
    set: &TrajectorySet,
    params: &SummaryParams,
    cursor: &AtomicUsize,
    shards: usize,
) -> Vec<Partial> {
    let mut local: Vec<Partial> = (0..shards).map(|_| Partial::default()).collect();
    let all = &set.trajectories;
    loop {
        let start = cursor.fetch_add(BATCH, Ordering::Relaxed);
        if start >= all.len() {
            break;
        }
        for traj in &all[start..(start + BATCH).min(all.len())] {
            for_each_contribution(traj, params, |c| {
                let node = c.node.packed();
                let code = (c.rm_idx << 1) | u32::from(c.flag == Flag::Absorption);
                let shard = if shards == 1 { 0 } else { shard_of(node, shards) };
                *local[shard].entry((node, code)).or_insert(0.0) += c.count;
            });
        }
    }
    local
}

fn fold_shard(j: usize, partials: &[Vec<Partial>], q: u8) -> Vec<(TileCoord, NodeChannels)> {
    let mut merged: Partial = Partial::default();
    for worker in partials {
        for (&key, &count) in &worker[j] {
            *merged.entry(key).or_insert(0.0) += count;
        }
    }
    let mut entries: Vec<(Key, f64)> = merged.into_iter().collect();
    entries.sort_unstable_by_key(|&(key, _)| key);
    let mut out: Vec<(TileCoord, NodeChannels)> = Vec::new();
    for ((node, code), count) in entries {
        if out.last().map(|(t, _)| t.packed()) != Some(node) {
            out.push((TileCoord::from_packed(q, node), NodeChannels::default()));
        }
        let channels = &mut out.last_mut().expect("pushed above").1;
        let flag = if code & 1 == 1 {
            Flag::Absorption
        } else {
            Flag::Emission
        };
        channels.channel_mut(flag).add(code >> 1, count);
    }
    out
}
