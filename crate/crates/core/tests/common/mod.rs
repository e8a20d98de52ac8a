#![allow(dead_code)]

use proptest::prelude::*;
use reach_core::geo::{tile_centroid, TileCoord};
use reach_core::trajectory::{TrackPoint, Trajectory, TrajectorySet};

pub const Q: u8 = 24;
pub const BASE_X: u32 = 13_813_586;
pub const BASE_Y: u32 = 6_357_328;

/// One trajectory as (x offset, y offset, seconds since previous record).
pub type Steps = Vec<(u32, u32, i64)>;

pub fn steps(max_len: usize, extent: u32) -> impl Strategy<Value = Steps> {
    prop::collection::vec((0..extent, 0..extent, 1i64..120), 1..=max_len)
}

pub fn build_set(trajs: &[Steps]) -> TrajectorySet {
    let trajectories = trajs
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let mut t = 1_201_881_600 + i as i64 * 7;
            let points = st
                .iter()
                .map(|&(dx, dy, gap)| {
                    t += gap;
                    let tile = TileCoord::new(Q, BASE_X + dx, BASE_Y + dy).unwrap();
                    TrackPoint {
                        tile,
                        t,
                        pos: tile_centroid(tile),
                    }
                })
                .collect();
            Trajectory {
                id: format!("m{i:03}"),
                points,
                cumulative_m: None,
            }
        })
        .collect();
    TrajectorySet::spanning(trajectories, Q)
}

/// Random sets of up to `max_m` trajectories of up to `max_len` records on
/// an `extent` x `extent` block, so tiles repeat and some pairs fall
/// outside small neighborhoods.
pub fn trajectory_set(max_m: usize, max_len: usize, extent: u32) -> impl Strategy<Value = TrajectorySet> {
    prop::collection::vec(steps(max_len, extent), 0..=max_m).prop_map(|t| build_set(&t))
}
