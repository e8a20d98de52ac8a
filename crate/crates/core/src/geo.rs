//! Spherical Mercator tile arithmetic and great-circle distance.
//!
//! Tiles follow the slippy-map convention: at zoom `q` the world is a
//! `2^q x 2^q` grid, `x` grows eastward from the antimeridian and `y` grows
//! southward from the northern projection limit.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Latitude limit of the square Web Mercator projection.
pub const MAX_MERCATOR_LAT: f64 = 85.051_128_78;

pub const MAX_ZOOM: u8 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    /// Validates the pair and wraps the longitude into `[-180, 180)`.
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(Error::InvalidCoordinate(format!("lat={lat}, lon={lon}")));
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::InvalidCoordinate(format!("latitude {lat} outside [-90, 90]")));
        }
        Ok(LatLon {
            lat,
            lon: normalize_lon(lon),
        })
    }
}

fn normalize_lon(lon: f64) -> f64 {
    if (-180.0..180.0).contains(&lon) {
        return lon;
    }
    let wrapped = (lon + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// A cell of the zoom-`q` Web Mercator grid.
///
/// Ordering is by zoom, then row (`y`), then column (`x`), which is the
/// canonical node order used by every on-disk format in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TileCoord {
    pub q: u8,
    pub x: u32,
    pub y: u32,
}

impl TileCoord {
    pub fn new(q: u8, x: u32, y: u32) -> Result<Self> {
        check_zoom(q)?;
        let n = grid_size(q);
        if u64::from(x) >= n || u64::from(y) >= n {
            return Err(Error::InvalidCoordinate(format!(
                "tile ({x}, {y}) outside the 2^{q} grid"
            )));
        }
        Ok(TileCoord { q, x, y })
    }

    /// Tile displaced by `(dx, dy)`, or `None` if that falls off the grid.
    pub fn offset_by(&self, dx: i64, dy: i64) -> Option<TileCoord> {
        let n = grid_size(self.q) as i64;
        let x = i64::from(self.x) + dx;
        let y = i64::from(self.y) + dy;
        if (0..n).contains(&x) && (0..n).contains(&y) {
            Some(TileCoord {
                q: self.q,
                x: x as u32,
                y: y as u32,
            })
        } else {
            None
        }
    }

    pub(crate) fn packed(&self) -> u64 {
        (u64::from(self.y) << 32) | u64::from(self.x)
    }

    pub(crate) fn from_packed(q: u8, key: u64) -> TileCoord {
        TileCoord {
            q,
            x: key as u32,
            y: (key >> 32) as u32,
        }
    }
}

impl Ord for TileCoord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.q, self.y, self.x).cmp(&(other.q, other.y, other.x))
    }
}

impl PartialOrd for TileCoord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TileCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.q, self.x, self.y)
    }
}

pub fn check_zoom(q: u8) -> Result<()> {
    if q == 0 || q > MAX_ZOOM {
        return Err(Error::InvalidParameter(format!(
            "zoom {q} outside [1, {MAX_ZOOM}]"
        )));
    }
    Ok(())
}

/// Number of tiles along one axis at zoom `q`.
pub fn grid_size(q: u8) -> u64 {
    1u64 << q
}

/// Continuous grid position of a point, in tile units.
///
/// Latitudes are clamped to the projection limit; the result is not clamped
/// to the grid, callers that need a cell index use [`latlon_to_tile`].
pub fn tile_fraction(p: LatLon, q: u8) -> (f64, f64) {
    let n = grid_size(q) as f64;
    let lat = p.lat.clamp(-MAX_MERCATOR_LAT, MAX_MERCATOR_LAT).to_radians();
    let fx = (p.lon + 180.0) / 360.0 * n;
    let fy = (1.0 - (lat.tan() + 1.0 / lat.cos()).ln() / PI) / 2.0 * n;
    (fx, fy)
}

/// Tile containing `p` at zoom `q`. Points on a tile edge belong to the
/// tile east/south of it.
pub fn latlon_to_tile(p: LatLon, q: u8) -> Result<TileCoord> {
    check_zoom(q)?;
    if !p.lat.is_finite() || !p.lon.is_finite() {
        return Err(Error::InvalidCoordinate(format!("lat={}, lon={}", p.lat, p.lon)));
    }
    let max = (grid_size(q) - 1) as f64;
    let (fx, fy) = tile_fraction(p, q);
    Ok(TileCoord {
        q,
        x: fx.floor().clamp(0.0, max) as u32,
        y: fy.floor().clamp(0.0, max) as u32,
    })
}

/// Inverse projection of a continuous grid position.
pub fn fraction_to_latlon(fx: f64, fy: f64, q: u8) -> LatLon {
    let n = grid_size(q) as f64;
    let lon = fx / n * 360.0 - 180.0;
    let lat = (PI * (1.0 - 2.0 * fy / n)).sinh().atan().to_degrees();
    LatLon { lat, lon }
}

pub fn tile_centroid(s: TileCoord) -> LatLon {
    fraction_to_latlon(f64::from(s.x) + 0.5, f64::from(s.y) + 0.5, s.q)
}

pub fn haversine_m(a: LatLon, b: LatLon) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Initial great-circle bearing from `a` to `b` in degrees, `[0, 360)`,
/// 0 = north, clockwise.
pub fn initial_bearing_deg(a: LatLon, b: LatLon) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let y = dlambda.sin() * phi2.cos();
    let x = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dlambda.cos();
    let deg = y.atan2(x).to_degrees().rem_euclid(360.0);
    if deg >= 360.0 {
        0.0
    } else {
        deg
    }
}

/// `(x2 - x1, y2 - y1)` between two tiles of the same zoom.
pub fn tile_offset(s: TileCoord, s2: TileCoord) -> Result<(i64, i64)> {
    if s.q != s2.q {
        return Err(Error::ZoomMismatch {
            expected: s.q,
            found: s2.q,
        });
    }
    Ok((
        i64::from(s2.x) - i64::from(s.x),
        i64::from(s2.y) - i64::from(s.y),
    ))
}

/// Whether `s2` lies in the `(2 delta_r + 1)^2` square centered on `s`.
#[inline]
pub fn in_neighborhood(s: TileCoord, s2: TileCoord, delta_r: u32) -> bool {
    s.q == s2.q && s.x.abs_diff(s2.x) <= delta_r && s.y.abs_diff(s2.y) <= delta_r
}

/// A rectangular block of tiles, `origin` at the northwest corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileWindow {
    pub origin: TileCoord,
    pub width: u32,
    pub height: u32,
}

impl TileWindow {
    pub fn new(origin: TileCoord, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("window must be at least 1x1".into()));
        }
        let n = grid_size(origin.q);
        if u64::from(origin.x) + u64::from(width) > n || u64::from(origin.y) + u64::from(height) > n {
            return Err(Error::InvalidParameter(format!(
                "window {width}x{height} at {origin} exceeds the grid"
            )));
        }
        Ok(TileWindow {
            origin,
            width,
            height,
        })
    }

    pub fn q(&self) -> u8 {
        self.origin.q
    }

    /// `(row, col)` of `tile` inside the window.
    #[inline]
    pub fn locate(&self, tile: TileCoord) -> Option<(usize, usize)> {
        if tile.q != self.origin.q || tile.x < self.origin.x || tile.y < self.origin.y {
            return None;
        }
        let col = tile.x - self.origin.x;
        let row = tile.y - self.origin.y;
        (col < self.width && row < self.height).then_some((row as usize, col as usize))
    }

    pub fn tile_at(&self, row: u32, col: u32) -> TileCoord {
        TileCoord {
            q: self.origin.q,
            x: self.origin.x + col,
            y: self.origin.y + row,
        }
    }

    pub fn tile_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}
