mod common;

use common::trajectory_set;
use proptest::prelude::*;
use reach_core::geo::{fraction_to_latlon, tile_centroid, LatLon, TileCoord, TileWindow, EARTH_RADIUS_M};
use reach_core::raster::{crm, hcrm, rnp, sc, RasterWindow, DEFAULT_WINDOW};
use reach_core::trajectory::TrajectorySet;

fn window_at(dx: i64, dy: i64, w: u32, h: u32) -> TileWindow {
    let origin = TileCoord::new(
        common::Q,
        (i64::from(common::BASE_X) + dx) as u32,
        (i64::from(common::BASE_Y) + dy) as u32,
    )
    .unwrap();
    TileWindow::new(origin, w, h).unwrap()
}

/// Independent great-circle helpers for the recount.
fn distance(a: LatLon, b: LatLon) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().asin()
}

fn bearing(a: LatLon, b: LatLon) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dl = (b.lon - a.lon).to_radians();
    let y = dl.sin() * p2.cos();
    let x = p1.cos() * p2.sin() - p1.sin() * p2.cos() * dl.cos();
    y.atan2(x).to_degrees().rem_euclid(360.0)
}

/// Counts recomputed one record at a time: `[crm, hcrm x12, sc x14]`.
fn recount(set: &TrajectorySet, w: &TileWindow) -> Vec<[f64; 27]> {
    let mut out = vec![[0.0; 27]; (w.width * w.height) as usize];
    for traj in &set.trajectories {
        for (k, p) in traj.points.iter().enumerate() {
            let col = i64::from(p.tile.x) - i64::from(w.origin.x);
            let row = i64::from(p.tile.y) - i64::from(w.origin.y);
            if col < 0 || row < 0 || col >= i64::from(w.width) || row >= i64::from(w.height) {
                continue;
            }
            let cell = &mut out[(row * i64::from(w.width) + col) as usize];
            cell[0] += 1.0;
            if k == 0 {
                continue;
            }
            let prev = &traj.points[k - 1];
            let (a, b) = (tile_centroid(prev.tile), tile_centroid(p.tile));
            if prev.tile != p.tile {
                let h = bearing(a, b);
                cell[1 + ((h / 30.0) as usize % 12)] += 1.0;
            }
            let mph = distance(a, b) / (p.t - prev.t) as f64 * 2.2369362921;
            cell[13 + ((mph / 5.0) as usize).min(13)] += 1.0;
        }
    }
    out
}

fn pixel_counts(r: &RasterWindow) -> Vec<Vec<f64>> {
    (0..r.height)
        .flat_map(|row| (0..r.width).map(move |col| (row, col)))
        .map(|(row, col)| r.pixel(row, col).to_vec())
        .collect()
}

fn shifted_equal(a: &RasterWindow, b: &RasterWindow, dx: i64, dy: i64) {
    // b's window sits (dx, dy) tiles from a's
    for row in 0..a.height as i64 {
        for col in 0..a.width as i64 {
            let (r2, c2) = (row - dy, col - dx);
            if r2 < 0 || c2 < 0 || r2 >= b.height as i64 || c2 >= b.width as i64 {
                continue;
            }
            assert_eq!(a.pixel(row as usize, col as usize), b.pixel(r2 as usize, c2 as usize));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lar_rasters_match_recount(set in trajectory_set(12, 15, 10), ox in -2i64..3, oy in -2i64..3) {
        let w = window_at(ox, oy, 9, 7);
        let expect = recount(&set, &w);
        let c = pixel_counts(&crm(&set, &w).unwrap());
        let h = pixel_counts(&hcrm(&set, &w).unwrap());
        let s = pixel_counts(&sc(&set, &w).unwrap());
        for (i, e) in expect.iter().enumerate() {
            prop_assert_eq!(c[i][0], e[0]);
            prop_assert_eq!(&h[i][..], &e[1..13]);
            prop_assert_eq!(&s[i][..], &e[13..27]);
        }
    }

    #[test]
    fn lar_rasters_translate_with_window(set in trajectory_set(8, 15, 10), dx in -3i64..4, dy in -3i64..4) {
        let a = window_at(0, 0, 10, 10);
        let b = window_at(dx, dy, 10, 10);
        for f in [crm, hcrm, sc] {
            shifted_equal(&f(&set, &a).unwrap(), &f(&set, &b).unwrap(), dx, dy);
        }
    }

    #[test]
    fn rnp_ignores_duplicate_roads(lines in prop::collection::vec(
        prop::collection::vec((-1.0..13.0f64, -1.0..13.0f64), 1..5), 0..4)
    ) {
        let w = window_at(0, 0, 12, 12);
        let roads: Vec<Vec<LatLon>> = lines
            .iter()
            .map(|l| l.iter().map(|&(fx, fy)| frac(&w, fx, fy)).collect())
            .collect();
        let twice: Vec<_> = roads.iter().chain(roads.iter()).cloned().collect();
        prop_assert_eq!(rnp(&twice, &w), rnp(&roads, &w));
    }

    #[test]
    fn rnp_covers_sampled_segment_points(a in (-2.0..14.0f64, -2.0..14.0f64), b in (-2.0..14.0f64, -2.0..14.0f64)) {
        let w = window_at(0, 0, 12, 12);
        let r = rnp(&[vec![frac(&w, a.0, a.1), frac(&w, b.0, b.1)]], &w);
        // every densely sampled point's tile is marked
        for i in 0..=2000 {
            let t = f64::from(i) / 2000.0;
            let (fx, fy) = (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
            let (col, row) = (fx.floor(), fy.floor());
            if (0.0..12.0).contains(&col) && (0.0..12.0).contains(&row) {
                prop_assert_eq!(r.get(row as usize, col as usize, 0), 1.0, "missed ({}, {})", col, row);
            }
        }
        // and every marked tile is within reach of the segment
        for row in 0..12 {
            for col in 0..12 {
                if r.get(row, col, 0) == 1.0 {
                    prop_assert!(touches_cell(a, b, col as f64, row as f64, 1e-6), "({}, {}) is off the road", col, row);
                }
            }
        }
    }
}

/// Point at fractional tile position `(fx, fy)` relative to the window.
fn frac(w: &TileWindow, fx: f64, fy: f64) -> LatLon {
    fraction_to_latlon(f64::from(w.origin.x) + fx, f64::from(w.origin.y) + fy, w.q())
}

/// Whether the segment meets the closed unit cell at `(cx, cy)`, padded by
/// `eps` to absorb the lat/lon round trip.
fn touches_cell(a: (f64, f64), b: (f64, f64), cx: f64, cy: f64, eps: f64) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = (b.0 - a.0, b.1 - a.1);
    for (p, q) in [
        (-d.0, a.0 - cx + eps),
        (d.0, cx + 1.0 + eps - a.0),
        (-d.1, a.1 - cy + eps),
        (d.1, cy + 1.0 + eps - a.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else if p < 0.0 {
            t0 = t0.max(q / p);
        } else {
            t1 = t1.min(q / p);
        }
    }
    t0 <= t1
}

#[test]
fn bucketed_raster_shapes_at_default_window() {
    let w = TileWindow::new(TileCoord::new(common::Q, common::BASE_X, common::BASE_Y).unwrap(), DEFAULT_WINDOW, DEFAULT_WINDOW)
        .unwrap();
    let set = TrajectorySet::empty(common::Q);
    let dims = |r: RasterWindow| (r.height, r.width, r.channels);
    assert_eq!(dims(crm(&set, &w).unwrap()), (256, 256, 1));
    assert_eq!(dims(hcrm(&set, &w).unwrap()), (256, 256, 12));
    assert_eq!(dims(sc(&set, &w).unwrap()), (256, 256, 14));
}
