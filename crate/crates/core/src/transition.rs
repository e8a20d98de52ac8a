//! Emission/absorption contributions of a single trajectory.
//!
//! Every ordered record pair `(k, l)` with `l >= k` whose tiles lie within
//! the reachable neighborhood yields one absorption entry at the earlier
//! tile and one emission entry at the later tile, both with the same count.
//! Self pairs (`l == k`) are included, so an `n`-record trajectory visits
//! `n (n + 1) / 2` pairs before neighborhood filtering.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geo::{check_zoom, in_neighborhood, tile_offset, TileCoord};
use crate::trajectory::Trajectory;

/// Largest supported neighborhood radius; keeps `L^2` well inside `u32`.
pub const MAX_DELTA_R: u32 = 4096;

pub const DEFAULT_DELTA_R: u32 = 12;
pub const DEFAULT_SIGMA_D_M: f64 = 100.0;
pub const DEFAULT_SIGMA_T_S: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    Unit,
    /// Gaussian decay in distance travelled (meters) and elapsed time
    /// (seconds) between the two records of a pair.
    Gaussian { sigma_d: f64, sigma_t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryParams {
    pub q: u8,
    pub delta_r: u32,
    pub weighting: Weighting,
}

impl SummaryParams {
    pub fn new(q: u8, delta_r: u32, weighting: Weighting) -> Result<Self> {
        check_zoom(q)?;
        if delta_r == 0 || delta_r > MAX_DELTA_R {
            return Err(Error::InvalidParameter(format!(
                "delta_r {delta_r} outside [1, {MAX_DELTA_R}]"
            )));
        }
        if let Weighting::Gaussian { sigma_d, sigma_t } = weighting {
            if !(sigma_d > 0.0 && sigma_d.is_finite() && sigma_t > 0.0 && sigma_t.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "gaussian sigmas must be positive, got sigma_d={sigma_d}, sigma_t={sigma_t}"
                )));
            }
        }
        Ok(SummaryParams {
            q,
            delta_r,
            weighting,
        })
    }

    pub fn unit(q: u8, delta_r: u32) -> Result<Self> {
        Self::new(q, delta_r, Weighting::Unit)
    }

    /// Side length `L = 2 delta_r + 1` of a summary channel.
    pub fn side(&self) -> usize {
        2 * self.delta_r as usize + 1
    }

    /// `L^2`, the number of cells per channel.
    pub fn cells(&self) -> usize {
        self.side() * self.side()
    }

    pub fn center_index(&self) -> u32 {
        let l = self.side() as u32;
        l * self.delta_r + self.delta_r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    Emission,
    Absorption,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub node: TileCoord,
    pub rm_idx: u32,
    pub flag: Flag,
    pub count: f64,
}

/// Row-major position of `s2` in the `L x L` channel of `s`: row is the
/// `y` offset, column the `x` offset, both shifted by `delta_r`.
pub fn row_major_index(s: TileCoord, s2: TileCoord, delta_r: u32) -> Result<u32> {
    let (dx, dy) = tile_offset(s, s2)?;
    let r = i64::from(delta_r);
    if dx.abs() > r || dy.abs() > r {
        return Err(Error::OutOfNeighborhood { dx, dy, delta_r });
    }
    let l = 2 * r + 1;
    Ok((l * (dy + r) + (dx + r)) as u32)
}

#[inline]
fn index_unchecked(s: TileCoord, s2: TileCoord, delta_r: u32) -> u32 {
    let l = 2 * delta_r + 1;
    let col = (s2.x + delta_r) - s.x;
    let row = (s2.y + delta_r) - s.y;
    l * row + col
}

/// `(dx, dy)` encoded by a row-major index.
pub fn inverse_index(idx: u32, delta_r: u32) -> Result<(i64, i64)> {
    let l = 2 * i64::from(delta_r) + 1;
    let i = i64::from(idx);
    if i >= l * l {
        return Err(Error::IndexRange {
            index: idx as usize,
            len: (l * l) as usize,
        });
    }
    Ok((i % l - i64::from(delta_r), i / l - i64::from(delta_r)))
}

/// Index of the negated offset. Because the layout is centrally
/// symmetric this is `L^2 - 1 - idx`.
#[inline]
pub fn mirror_index(idx: u32, delta_r: u32) -> u32 {
    let l = 2 * delta_r + 1;
    l * l - 1 - idx
}

/// Normal density with mean zero evaluated at `mu`.
pub fn gaussian(mu: f64, sigma: f64) -> f64 {
    (-(mu * mu) / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// Product of the distance and time Gaussians.
pub fn gaussian_weight(delta_d: f64, delta_t: f64, sigma_d: f64, sigma_t: f64) -> f64 {
    gaussian(delta_d, sigma_d) * gaussian(delta_t, sigma_t)
}

/// Streams the contributions of `traj` into `emit`. Zero-weight pairs
/// (Gaussian underflow) are skipped.
pub fn for_each_contribution<F>(traj: &Trajectory, params: &SummaryParams, mut emit: F)
where
    F: FnMut(Contribution),
{
    let points = &traj.points;
    let delta_r = params.delta_r;
    let computed;
    let distances: &[f64] = match params.weighting {
        Weighting::Unit => &[],
        Weighting::Gaussian { .. } => match &traj.cumulative_m {
            Some(d) if d.len() == points.len() => d,
            _ => {
                computed = traj.cumulative_distances();
                &computed
            }
        },
    };
    for (k, pk) in points.iter().enumerate() {
        for (l, pl) in points.iter().enumerate().skip(k) {
            if !in_neighborhood(pk.tile, pl.tile, delta_r) {
                continue;
            }
            let count = match params.weighting {
                Weighting::Unit => 1.0,
                Weighting::Gaussian { sigma_d, sigma_t } => gaussian_weight(
                    distances[l] - distances[k],
                    (pl.t - pk.t) as f64,
                    sigma_d,
                    sigma_t,
                ),
            };
            if count <= 0.0 {
                continue;
            }
            emit(Contribution {
                node: pk.tile,
                rm_idx: index_unchecked(pk.tile, pl.tile, delta_r),
                flag: Flag::Absorption,
                count,
            });
            emit(Contribution {
                node: pl.tile,
                rm_idx: index_unchecked(pl.tile, pk.tile, delta_r),
                flag: Flag::Emission,
                count,
            });
        }
    }
}

pub fn generate_contributions(traj: &Trajectory, params: &SummaryParams) -> Vec<Contribution> {
    let mut out = Vec::new();
    for_each_contribution(traj, params, |c| out.push(c));
    out
}
