use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{NodeChannels, Provenance, ReachabilityMap};
use crate::geo::{haversine_m, tile_centroid, TileCoord};
use crate::trajectory::TrajectorySet;
use crate::transition::{SummaryParams, Weighting};

/// Sequential, single-map transcription of the summary algorithm, kept
/// free of the parallel engine's machinery so it can serve as its oracle.
/// Intended for small inputs.
pub fn brute_force_reference(set: &TrajectorySet, params: &SummaryParams) -> ReachabilityMap {
    let delta_r = i64::from(params.delta_r);
    let side = 2 * delta_r + 1;
    let get_index = |s: TileCoord, s2: TileCoord| -> u32 {
        let dy = i64::from(s2.y) - i64::from(s.y);
        let dx = i64::from(s2.x) - i64::from(s.x);
        (side * (dy + delta_r) + (dx + delta_r)) as u32
    };
    let g = |mu: f64, sigma: f64| (1.0 / ((2.0 * PI).sqrt() * sigma)) * (-(mu * mu) / (2.0 * sigma * sigma)).exp();

    let mut s: BTreeMap<TileCoord, NodeChannels> = BTreeMap::new();
    for traj in &set.trajectories {
        let z: Vec<TileCoord> = traj.points.iter().map(|p| p.tile).collect();
        let t: Vec<i64> = traj.points.iter().map(|p| p.t).collect();
        let n = z.len();
        let mut d = vec![0.0; n];
        for k in 1..n {
            d[k] = d[k - 1] + haversine_m(tile_centroid(z[k - 1]), tile_centroid(z[k]));
        }
        for k in 0..n {
            for l in k..n {
                let dx = (i64::from(z[l].x) - i64::from(z[k].x)).abs();
                let dy = (i64::from(z[l].y) - i64::from(z[k].y)).abs();
                if dx > delta_r || dy > delta_r {
                    continue;
                }
                let c = match params.weighting {
                    Weighting::Unit => 1.0,
                    Weighting::Gaussian { sigma_d, sigma_t } => {
                        g(d[l] - d[k], sigma_d) * g((t[l] - t[k]) as f64, sigma_t)
                    }
                };
                if c == 0.0 {
                    continue;
                }
                let r_kl = get_index(z[k], z[l]);
                let r_lk = get_index(z[l], z[k]);
                s.entry(z[k]).or_default().absorption.add(r_kl, c);
                s.entry(z[l]).or_default().emission.add(r_lk, c);
            }
        }
    }
    ReachabilityMap::from_nodes(
        *params,
        Provenance {
            t0: set.t0,
            dt: set.dt,
        },
        s,
    )
}
