//! Trajectories: ingest, cleaning, windowing and synthetic generation.

mod csv;
mod filter;
mod synth;
mod tdrive;

use std::collections::BTreeMap;
use std::io::{self, Write};

use sha2::{Digest, Sha256};

use crate::geo::{haversine_m, latlon_to_tile, tile_centroid, LatLon, TileCoord};
use crate::error::{Error, Result};

pub use self::csv::{parse_csv, write_generic_csv, CsvFormat, IngestStats, ParsedSet};
pub use self::filter::{modality_filter, FilterContext, KeepAll, MaxSpeedFilter, RecordFilter};
pub use self::synth::{synth_trajectories, SynthConfig, SynthModel, SCALING_PRESETS};
pub use self::tdrive::{preprocess_tdrive, TDRIVE_UTC_OFFSET_S};

/// A record before tiling.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub mover_id: String,
    pub t: i64,
    pub pos: LatLon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackPoint {
    pub tile: TileCoord,
    pub t: i64,
    /// Position as observed, before tiling.
    pub pos: LatLon,
}

/// Chronological records of one mover. Timestamps are strictly increasing
/// and every tile shares one zoom.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    pub points: Vec<TrackPoint>,
    /// Distance travelled up to each point along consecutive tile centroids.
    pub cumulative_m: Option<Vec<f64>>,
}

impl Trajectory {
    /// Sorts by time and drops equal-timestamp duplicates, keeping the
    /// first one seen. Returns the trajectory and the number dropped.
    pub fn from_points(id: impl Into<String>, mut points: Vec<TrackPoint>) -> (Self, usize) {
        points.sort_by_key(|p| p.t);
        let before = points.len();
        points.dedup_by_key(|p| p.t);
        let dropped = before - points.len();
        (
            Trajectory {
                id: id.into(),
                points,
                cumulative_m: None,
            },
            dropped,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Running haversine distance between consecutive tile centroids,
    /// starting at 0.
    pub fn cumulative_distances(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut acc = 0.0;
        let mut prev: Option<LatLon> = None;
        for p in &self.points {
            let c = tile_centroid(p.tile);
            if let Some(prev) = prev {
                acc += haversine_m(prev, c);
            }
            out.push(acc);
            prev = Some(c);
        }
        out
    }

    pub fn with_cumulative_distance(mut self) -> Self {
        self.cumulative_m = Some(self.cumulative_distances());
        self
    }
}

/// Trajectories observed during `[t0, t0 + dt]` at a single zoom.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub trajectories: Vec<Trajectory>,
    pub t0: i64,
    pub dt: i64,
    pub zoom: u8,
}

impl TrajectorySet {
    pub fn empty(zoom: u8) -> Self {
        TrajectorySet {
            trajectories: Vec::new(),
            t0: 0,
            dt: 0,
            zoom,
        }
    }

    /// Groups raw records by mover (trajectories ordered by mover id), tiles
    /// them at zoom `q` and fixes the observation interval to the span of
    /// the data. Returns the set and the number of duplicate timestamps
    /// dropped.
    pub fn from_raw(records: Vec<RawRecord>, q: u8) -> Result<(Self, usize)> {
        let mut by_mover: BTreeMap<String, Vec<TrackPoint>> = BTreeMap::new();
        for r in records {
            let tile = latlon_to_tile(r.pos, q)?;
            by_mover.entry(r.mover_id).or_default().push(TrackPoint {
                tile,
                t: r.t,
                pos: r.pos,
            });
        }
        let mut dropped = 0;
        let trajectories = by_mover
            .into_iter()
            .map(|(id, points)| {
                let (traj, d) = Trajectory::from_points(id, points);
                dropped += d;
                traj
            })
            .collect();
        Ok((Self::spanning(trajectories, q), dropped))
    }

    /// Wraps trajectories with the interval set to the span of their
    /// timestamps.
    pub fn spanning(trajectories: Vec<Trajectory>, zoom: u8) -> Self {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for p in trajectories.iter().flat_map(|t| &t.points) {
            lo = lo.min(p.t);
            hi = hi.max(p.t);
        }
        if lo > hi {
            return TrajectorySet {
                trajectories,
                t0: 0,
                dt: 0,
                zoom,
            };
        }
        TrajectorySet {
            trajectories,
            t0: lo,
            dt: hi - lo,
            zoom,
        }
    }

    /// Restricts to records inside `[t0, t0 + dt]`; trajectories left empty
    /// are dropped.
    pub fn window(&self, t0: i64, dt: i64) -> Result<Self> {
        if dt < 0 {
            return Err(Error::InvalidParameter(format!("negative interval {dt}")));
        }
        let end = t0.saturating_add(dt);
        let trajectories = self
            .trajectories
            .iter()
            .filter_map(|traj| {
                let points: Vec<_> = traj
                    .points
                    .iter()
                    .filter(|p| p.t >= t0 && p.t <= end)
                    .cloned()
                    .collect();
                (!points.is_empty()).then(|| Trajectory {
                    id: traj.id.clone(),
                    points,
                    cumulative_m: None,
                })
            })
            .collect();
        Ok(TrajectorySet {
            trajectories,
            t0,
            dt,
            zoom: self.zoom,
        })
    }

    pub fn record_count(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Hex SHA-256 of the canonical generic CSV rendering.
    pub fn digest(&self) -> String {
        let mut hasher = DigestWriter(Sha256::new());
        write_generic_csv(self, &mut hasher).expect("hashing never fails");
        hasher
            .0
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

struct DigestWriter(Sha256);

impl Write for DigestWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}
