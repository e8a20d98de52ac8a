use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{TrackPoint, Trajectory, TrajectorySet};
use crate::error::{Error, Result};
use crate::geo::{grid_size, tile_centroid, TileCoord};

/// Trip counts of the strong-scaling datasets.
pub const SCALING_PRESETS: [usize; 3] = [2000, 8000, 64000];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthModel {
    /// Unconstrained steps of up to two tiles in each axis.
    RandomWalk,
    /// Movement restricted to a Manhattan lattice of streets every
    /// `spacing` tiles, with stops and turns at intersections.
    RoadGrid { spacing: u32 },
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub count: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub origin: TileCoord,
    pub width: u32,
    pub height: u32,
    pub model: SynthModel,
    pub start_time: i64,
}

impl SynthConfig {
    /// Road-grid data over a 1024x1024 block of zoom-24 tiles in Beijing,
    /// trips of 10 to 60 records spread over one week.
    pub fn preset(count: usize, seed: u64) -> Self {
        SynthConfig {
            seed,
            count,
            min_len: 10,
            max_len: 60,
            origin: TileCoord {
                q: 24,
                x: 13_813_000,
                y: 6_357_000,
            },
            width: 1024,
            height: 1024,
            model: SynthModel::RoadGrid { spacing: 8 },
            // 2008-02-02 00:00 Beijing time
            start_time: 1_201_881_600,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter("synthetic grid is empty".into()));
        }
        let n = grid_size(self.origin.q);
        if u64::from(self.origin.x) + u64::from(self.width) > n
            || u64::from(self.origin.y) + u64::from(self.height) > n
        {
            return Err(Error::InvalidParameter("synthetic grid exceeds the tile grid".into()));
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(Error::InvalidParameter(format!(
                "bad trajectory length range [{}, {}]",
                self.min_len, self.max_len
            )));
        }
        if let SynthModel::RoadGrid { spacing: 0 } = self.model {
            return Err(Error::InvalidParameter("lattice spacing must be positive".into()));
        }
        Ok(())
    }
}

const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Deterministic trajectory generator: the same config always yields the
/// same set.
pub fn synth_trajectories(cfg: &SynthConfig) -> Result<TrajectorySet> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trajectories = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let n = rng.gen_range(cfg.min_len..=cfg.max_len);
        let mut t = cfg.start_time + rng.gen_range(0..7 * 86_400);
        let cells = match cfg.model {
            SynthModel::RandomWalk => random_walk(cfg, n, &mut rng),
            SynthModel::RoadGrid { spacing } => road_walk(cfg, spacing, n, &mut rng),
        };
        let mut points = Vec::with_capacity(n);
        for (x, y) in cells {
            let tile = TileCoord {
                q: cfg.origin.q,
                x: cfg.origin.x + x,
                y: cfg.origin.y + y,
            };
            points.push(TrackPoint {
                tile,
                t,
                pos: tile_centroid(tile),
            });
            t += rng.gen_range(1..=15);
        }
        trajectories.push(Trajectory {
            id: format!("syn{i:06}"),
            points,
            cumulative_m: None,
        });
    }
    Ok(TrajectorySet::spanning(trajectories, cfg.origin.q))
}

fn random_walk(cfg: &SynthConfig, n: usize, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let mut x = rng.gen_range(0..cfg.width) as i64;
    let mut y = rng.gen_range(0..cfg.height) as i64;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push((x as u32, y as u32));
        x = (x + rng.gen_range(-2..=2)).clamp(0, i64::from(cfg.width) - 1);
        y = (y + rng.gen_range(-2..=2)).clamp(0, i64::from(cfg.height) - 1);
    }
    out
}

fn road_walk(cfg: &SynthConfig, spacing: u32, n: usize, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let w = i64::from(cfg.width);
    let h = i64::from(cfg.height);
    let sp = i64::from(spacing);
    let mut x = rng.gen_range(0..=(w - 1) / sp) * sp;
    let mut y = rng.gen_range(0..=(h - 1) / sp) * sp;
    let mut dir = DIRS[rng.gen_range(0..4)];
    let inside = |x: i64, y: i64| (0..w).contains(&x) && (0..h).contains(&y);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push((x as u32, y as u32));
        if rng.gen_bool(0.15) {
            continue;
        }
        for _ in 0..rng.gen_range(1..=2) {
            if x % sp == 0 && y % sp == 0 && rng.gen_bool(0.3) {
                dir = if dir.0 == 0 {
                    DIRS[rng.gen_range(0..2)]
                } else {
                    DIRS[rng.gen_range(2..4)]
                };
            }
            if !inside(x + dir.0, y + dir.1) {
                dir = (-dir.0, -dir.1);
            }
            if !inside(x + dir.0, y + dir.1) {
                break;
            }
            x += dir.0;
            y += dir.1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: SynthModel) -> SynthConfig {
        SynthConfig {
            count: 50,
            width: 64,
            height: 48,
            model,
            ..SynthConfig::preset(0, 7)
        }
    }

    #[test]
    fn same_seed_same_set() {
        let cfg = small(SynthModel::RoadGrid { spacing: 8 });
        let a = synth_trajectories(&cfg).unwrap();
        let b = synth_trajectories(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
        let c = synth_trajectories(&SynthConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn road_grid_stays_on_lattice() {
        let cfg = small(SynthModel::RoadGrid { spacing: 8 });
        let set = synth_trajectories(&cfg).unwrap();
        assert_eq!(set.trajectories.len(), 50);
        for p in set.trajectories.iter().flat_map(|t| &t.points) {
            let dx = p.tile.x - cfg.origin.x;
            let dy = p.tile.y - cfg.origin.y;
            assert!(dx.is_multiple_of(8) || dy.is_multiple_of(8), "({dx}, {dy}) off lattice");
            assert!(dx < cfg.width && dy < cfg.height);
        }
    }

    #[test]
    fn single_record_trajectories() {
        let cfg = SynthConfig {
            min_len: 1,
            max_len: 1,
            ..small(SynthModel::RandomWalk)
        };
        let set = synth_trajectories(&cfg).unwrap();
        assert!(set.trajectories.iter().all(|t| t.len() == 1));
    }

    #[test]
    fn timestamps_strictly_increase() {
        let set = synth_trajectories(&small(SynthModel::RandomWalk)).unwrap();
        for t in &set.trajectories {
            assert!(t.points.windows(2).all(|w| w[0].t < w[1].t));
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let cfg = SynthConfig {
            width: 0,
            ..small(SynthModel::RandomWalk)
        };
        assert!(synth_trajectories(&cfg).is_err());
    }
}
