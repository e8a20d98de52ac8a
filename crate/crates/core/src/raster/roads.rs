//! Road network presence: `LINESTRING` input and grid line coverage.

use std::collections::BTreeSet;

use super::RasterWindow;
use crate::error::{Error, Result};
use crate::geo::{tile_fraction, LatLon, TileWindow};

/// Parses one `LINESTRING(lon lat, lon lat, ...)` per line. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_linestrings(text: &str) -> Result<Vec<Vec<LatLon>>> {
    let mut out = Vec::new();
    let mut offset = 0u64;
    for line in text.lines() {
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            out.push(parse_one(trimmed).ok_or_else(|| {
                Error::format(offset, format!("bad LINESTRING {trimmed:?}"))
            })?);
        }
        offset += line.len() as u64 + 1;
    }
    Ok(out)
}

fn parse_one(s: &str) -> Option<Vec<LatLon>> {
    let head = s.get(..10)?;
    if !head.eq_ignore_ascii_case("LINESTRING") {
        return None;
    }
    let body = s[10..].trim();
    let inner = body.strip_prefix('(')?.strip_suffix(')')?;
    let mut pts = Vec::new();
    for pair in inner.split(',') {
        let mut it = pair.split_whitespace();
        let lon: f64 = it.next()?.parse().ok()?;
        let lat: f64 = it.next()?.parse().ok()?;
        if it.next().is_some() {
            return None;
        }
        pts.push(LatLon::new(lat, lon).ok()?);
    }
    (!pts.is_empty()).then_some(pts)
}

/// Every grid cell touched by the segment from `a` to `b` (continuous tile
/// units). When the segment passes exactly through a cell corner both
/// side-neighbors are included.
pub fn supercover(a: (f64, f64), b: (f64, f64)) -> Vec<(i64, i64)> {
    let (x0, y0) = a;
    let (dx, dy) = (b.0 - x0, b.1 - y0);
    let mut x = x0.floor() as i64;
    let mut y = y0.floor() as i64;
    let step_x = if dx > 0.0 { 1 } else if dx < 0.0 { -1 } else { 0 };
    let step_y = if dy > 0.0 { 1 } else if dy < 0.0 { -1 } else { 0 };
    let delta_x = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
    let delta_y = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };
    let mut t_x = match step_x {
        1 => ((x as f64 + 1.0) - x0) / dx,
        -1 => (x0 - x as f64) / -dx,
        _ => f64::INFINITY,
    };
    let mut t_y = match step_y {
        1 => ((y as f64 + 1.0) - y0) / dy,
        -1 => (y0 - y as f64) / -dy,
        _ => f64::INFINITY,
    };
    let mut cells = vec![(x, y)];
    loop {
        let t = t_x.min(t_y);
        if t > 1.0 {
            break;
        }
        if t_x < t_y {
            x += step_x;
            t_x += delta_x;
        } else if t_y < t_x {
            y += step_y;
            t_y += delta_y;
        } else {
            cells.push((x + step_x, y));
            cells.push((x, y + step_y));
            x += step_x;
            y += step_y;
            t_x += delta_x;
            t_y += delta_y;
        }
        cells.push((x, y));
    }
    cells
}

/// Clips a segment to an axis-aligned box, returning the parametric range
/// that survives.
fn clip(a: (f64, f64), b: (f64, f64), lo: (f64, f64), hi: (f64, f64)) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = (b.0 - a.0, b.1 - a.1);
    for (p, q) in [
        (-d.0, a.0 - lo.0),
        (d.0, hi.0 - a.0),
        (-d.1, a.1 - lo.1),
        (d.1, hi.1 - a.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Binary raster: 1 where any road segment crosses the pixel's tile.
pub fn rnp(roads: &[Vec<LatLon>], window: &TileWindow) -> RasterWindow {
    let q = window.q();
    let mut out = RasterWindow::zeros(window, vec!["road".into()]);
    let ox = f64::from(window.origin.x);
    let oy = f64::from(window.origin.y);
    // one tile of margin so clipping never trims a touched edge cell
    let lo = (ox - 1.0, oy - 1.0);
    let hi = (ox + f64::from(window.width) + 1.0, oy + f64::from(window.height) + 1.0);
    let mut hit: BTreeSet<(i64, i64)> = BTreeSet::new();
    for line in roads {
        let pts: Vec<(f64, f64)> = line.iter().map(|&p| tile_fraction(p, q)).collect();
        let segments: Vec<((f64, f64), (f64, f64))> = if pts.len() == 1 {
            vec![(pts[0], pts[0])]
        } else {
            pts.windows(2).map(|w| (w[0], w[1])).collect()
        };
        for (a, b) in segments {
            let Some((t0, t1)) = clip(a, b, lo, hi) else {
                continue;
            };
            let lerp = |t: f64| (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
            let (ca, cb) = if t0 == 0.0 && t1 == 1.0 { (a, b) } else { (lerp(t0), lerp(t1)) };
            hit.extend(supercover(ca, cb));
        }
    }
    for (x, y) in hit {
        let col = x - window.origin.x as i64;
        let row = y - window.origin.y as i64;
        if (0..window.width as i64).contains(&col) && (0..window.height as i64).contains(&row) {
            out.set(row as usize, col as usize, 0, 1.0);
        }
    }
    out
}
