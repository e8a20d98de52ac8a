//! Local aggregate representations: per-tile record counts, optionally
//! bucketed by heading or speed.

use super::RasterWindow;
use crate::error::{Error, Result};
use crate::geo::{haversine_m, initial_bearing_deg, tile_centroid, TileWindow};
use crate::tensor::EmbeddingTable;
use crate::trajectory::{TrackPoint, TrajectorySet};

pub const HEADING_BUCKETS: usize = 12;
pub const SPEED_BUCKETS: usize = 14;
pub const MPS_TO_MPH: f64 = 2.236_936_292_1;

const HEADING_WIDTH_DEG: f64 = 30.0;
const SPEED_WIDTH_MPH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketKind {
    Heading,
    Speed,
}

impl BucketKind {
    pub fn count(self) -> usize {
        match self {
            BucketKind::Heading => HEADING_BUCKETS,
            BucketKind::Speed => SPEED_BUCKETS,
        }
    }

    pub fn channel_names(self) -> Vec<String> {
        match self {
            BucketKind::Heading => (0..HEADING_BUCKETS)
                .map(|i| format!("heading_{:03}", i * 30))
                .collect(),
            BucketKind::Speed => (0..SPEED_BUCKETS)
                .map(|i| {
                    if i + 1 == SPEED_BUCKETS {
                        format!("speed_{}plus_mph", i * 5)
                    } else {
                        format!("speed_{}_{}_mph", i * 5, (i + 1) * 5)
                    }
                })
                .collect(),
        }
    }
}

/// Bucket of a bearing in degrees (0 = north, clockwise).
pub fn heading_bucket(bearing_deg: f64) -> usize {
    let b = bearing_deg.rem_euclid(360.0);
    ((b / HEADING_WIDTH_DEG).floor() as usize).min(HEADING_BUCKETS - 1)
}

/// Bucket of a speed in mph; everything at or above 65 mph shares the
/// last bucket.
pub fn speed_bucket(mph: f64) -> usize {
    ((mph.max(0.0) / SPEED_WIDTH_MPH).floor() as usize).min(SPEED_BUCKETS - 1)
}

/// Heading and speed of a record derived from its predecessor's tile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    /// `None` when both records share a tile.
    pub heading_deg: Option<f64>,
    pub speed_mph: f64,
}

pub fn record_motion(prev: &TrackPoint, cur: &TrackPoint) -> Motion {
    let a = tile_centroid(prev.tile);
    let b = tile_centroid(cur.tile);
    let heading_deg = (prev.tile != cur.tile).then(|| initial_bearing_deg(a, b));
    let dt = (cur.t - prev.t) as f64;
    let speed_mph = if prev.tile == cur.tile {
        0.0
    } else {
        haversine_m(a, b) / dt * MPS_TO_MPH
    };
    Motion {
        heading_deg,
        speed_mph,
    }
}

fn check_zoom(set: &TrajectorySet, window: &TileWindow) -> Result<()> {
    if set.zoom != window.q() {
        return Err(Error::ZoomMismatch {
            expected: window.q(),
            found: set.zoom,
        });
    }
    Ok(())
}

/// Count of records per tile.
pub fn crm(set: &TrajectorySet, window: &TileWindow) -> Result<RasterWindow> {
    check_zoom(set, window)?;
    let mut out = RasterWindow::zeros(window, vec!["count".into()]);
    for p in set.trajectories.iter().flat_map(|t| &t.points) {
        if let Some((r, c)) = window.locate(p.tile) {
            out.add(r, c, 0, 1.0);
        }
    }
    Ok(out)
}

fn bucketed(set: &TrajectorySet, window: &TileWindow, kind: BucketKind) -> Result<RasterWindow> {
    check_zoom(set, window)?;
    let mut out = RasterWindow::zeros(window, kind.channel_names());
    for traj in &set.trajectories {
        for pair in traj.points.windows(2) {
            let Some((r, c)) = window.locate(pair[1].tile) else {
                continue;
            };
            let m = record_motion(&pair[0], &pair[1]);
            let bucket = match kind {
                BucketKind::Heading => match m.heading_deg {
                    Some(h) => heading_bucket(h),
                    None => continue,
                },
                BucketKind::Speed => speed_bucket(m.speed_mph),
            };
            out.add(r, c, bucket, 1.0);
        }
    }
    Ok(out)
}

/// Record counts split into 12 heading buckets of 30 degrees. The first
/// record of a trajectory and records that stay in their predecessor's
/// tile have no heading and are not counted.
pub fn hcrm(set: &TrajectorySet, window: &TileWindow) -> Result<RasterWindow> {
    bucketed(set, window, BucketKind::Heading)
}

/// Record counts split into 14 speed buckets of 5 mph. First records are
/// not counted.
pub fn sc(set: &TrajectorySet, window: &TileWindow) -> Result<RasterWindow> {
    bucketed(set, window, BucketKind::Speed)
}

/// Embedding vectors placed at their tiles; inactive pixels stay zero.
pub fn embedding_raster(table: &EmbeddingTable, window: &TileWindow, d_r: usize) -> Result<RasterWindow> {
    if table.d_r as usize != d_r {
        return Err(Error::DimensionMismatch {
            expected: d_r,
            found: table.d_r as usize,
        });
    }
    let names = (0..d_r).map(|i| format!("emb_{i}")).collect();
    let mut out = RasterWindow::zeros(window, names);
    for row in &table.rows {
        if row.vector.len() != d_r {
            return Err(Error::DimensionMismatch {
                expected: d_r,
                found: row.vector.len(),
            });
        }
        let tile = crate::geo::TileCoord {
            q: window.q(),
            x: row.x,
            y: row.y,
        };
        if let Some((r, c)) = window.locate(tile) {
            for (i, &v) in row.vector.iter().enumerate() {
                out.set(r, c, i, f64::from(v));
            }
        }
    }
    Ok(out)
}
