use super::{TrackPoint, Trajectory, TrajectorySet};
use crate::geo::haversine_m;

/// What a [`RecordFilter`] sees when deciding on one record.
pub struct FilterContext<'a> {
    pub trajectory: &'a Trajectory,
    pub index: usize,
    /// Most recent record of this trajectory that was kept.
    pub last_kept: Option<&'a TrackPoint>,
}

impl<'a> FilterContext<'a> {
    pub fn record(&self) -> &'a TrackPoint {
        &self.trajectory.points[self.index]
    }
}

/// Keep/drop decision for a single record, the seam where a motion
/// modality classifier plugs in.
pub trait RecordFilter {
    fn keep(&self, ctx: &FilterContext<'_>) -> bool;
}

impl<F> RecordFilter for F
where
    F: Fn(&FilterContext<'_>) -> bool,
{
    fn keep(&self, ctx: &FilterContext<'_>) -> bool {
        self(ctx)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KeepAll;

impl RecordFilter for KeepAll {
    fn keep(&self, _ctx: &FilterContext<'_>) -> bool {
        true
    }
}

/// Drops records reached from the last kept record faster than
/// `max_mps`.
#[derive(Debug, Clone, Copy)]
pub struct MaxSpeedFilter {
    pub max_mps: f64,
}

impl RecordFilter for MaxSpeedFilter {
    fn keep(&self, ctx: &FilterContext<'_>) -> bool {
        let Some(prev) = ctx.last_kept else {
            return true;
        };
        let cur = ctx.record();
        let dt = (cur.t - prev.t) as f64;
        haversine_m(prev.pos, cur.pos) <= self.max_mps * dt
    }
}

/// Applies `filter` to every record; trajectories left empty are removed.
pub fn modality_filter<F: RecordFilter + ?Sized>(set: &TrajectorySet, filter: &F) -> TrajectorySet {
    let trajectories = set
        .trajectories
        .iter()
        .filter_map(|traj| {
            let mut kept: Vec<usize> = Vec::with_capacity(traj.len());
            for index in 0..traj.len() {
                let ctx = FilterContext {
                    trajectory: traj,
                    index,
                    last_kept: kept.last().map(|&k| &traj.points[k]),
                };
                if filter.keep(&ctx) {
                    kept.push(index);
                }
            }
            if kept.is_empty() {
                return None;
            }
            let all = kept.len() == traj.len();
            Some(Trajectory {
                id: traj.id.clone(),
                points: kept.into_iter().map(|k| traj.points[k].clone()).collect(),
                cumulative_m: if all { traj.cumulative_m.clone() } else { None },
            })
        })
        .collect();
    TrajectorySet {
        trajectories,
        t0: set.t0,
        dt: set.dt,
        zoom: set.zoom,
    }
}
