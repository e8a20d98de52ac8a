use chrono::DateTime;

use super::{Trajectory, TrajectorySet};

/// T-Drive timestamps are Beijing local time.
pub const TDRIVE_UTC_OFFSET_S: i64 = 8 * 3600;

const DAY_S: i64 = 86_400;

/// Splits every mover's records by local calendar day; each non-empty
/// (mover, day) becomes a trajectory named `{mover}_{yyyymmdd}`.
/// Record count is conserved.
pub fn preprocess_tdrive(set: &TrajectorySet) -> TrajectorySet {
    let mut out = Vec::new();
    for traj in &set.trajectories {
        let mut current: Option<(i64, Trajectory)> = None;
        for p in &traj.points {
            let day = (p.t + TDRIVE_UTC_OFFSET_S).div_euclid(DAY_S);
            match &mut current {
                Some((d, t)) if *d == day => t.points.push(p.clone()),
                _ => {
                    if let Some((_, done)) = current.take() {
                        out.push(done);
                    }
                    current = Some((
                        day,
                        Trajectory {
                            id: format!("{}_{}", traj.id, day_label(day)),
                            points: vec![p.clone()],
                            cumulative_m: None,
                        },
                    ));
                }
            }
        }
        if let Some((_, done)) = current {
            out.push(done);
        }
    }
    TrajectorySet {
        trajectories: out,
        t0: set.t0,
        dt: set.dt,
        zoom: set.zoom,
    }
}

fn day_label(day: i64) -> String {
    DateTime::from_timestamp(day * DAY_S, 0)
        .map(|d| d.format("%Y%m%d").to_string())
        .unwrap_or_else(|| format!("day{day}"))
}
