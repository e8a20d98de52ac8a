//! Image-like rasters over a block of tiles.

mod lar;
mod roads;

use std::fmt::Write as _;
use std::path::Path;

use crate::codec::write_atomic;
use crate::error::{Error, Result};
use crate::geo::{TileCoord, TileWindow};
use crate::tensor::{sidecar_path, DType, Tensor};

pub use self::lar::{
    crm, embedding_raster, hcrm, heading_bucket, record_motion, sc, speed_bucket, BucketKind,
    Motion, HEADING_BUCKETS, MPS_TO_MPH, SPEED_BUCKETS,
};
pub use self::roads::{parse_linestrings, rnp, supercover};

/// Default raster side length in pixels.
pub const DEFAULT_WINDOW: u32 = 256;

/// `h x w x c` values; pixel `(row, col)` is tile
/// `(origin.x + col, origin.y + row)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterWindow {
    pub origin: TileCoord,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
    pub channel_names: Vec<String>,
}

impl RasterWindow {
    pub fn zeros(window: &TileWindow, channel_names: Vec<String>) -> Self {
        let height = window.height as usize;
        let width = window.width as usize;
        let channels = channel_names.len();
        RasterWindow {
            origin: window.origin,
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
            channel_names,
        }
    }

    #[inline]
    pub fn offset(&self, row: usize, col: usize, channel: usize) -> usize {
        (row * self.width + col) * self.channels + channel
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[self.offset(row, col, channel)]
    }

    pub fn add(&mut self, row: usize, col: usize, channel: usize, v: f64) {
        let i = self.offset(row, col, channel);
        self.data[i] += v;
    }

    pub fn set(&mut self, row: usize, col: usize, channel: usize, v: f64) {
        let i = self.offset(row, col, channel);
        self.data[i] = v;
    }

    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let i = self.offset(row, col, 0);
        &self.data[i..i + self.channels]
    }

    pub fn window(&self) -> TileWindow {
        TileWindow {
            origin: self.origin,
            width: self.width as u32,
            height: self.height as u32,
        }
    }

    /// Channels `range` as a new raster.
    pub fn slice_channels(&self, range: std::ops::Range<usize>) -> Result<RasterWindow> {
        if range.start > range.end || range.end > self.channels {
            return Err(Error::Geometry(format!(
                "channel range {range:?} outside 0..{}",
                self.channels
            )));
        }
        let c = range.len();
        let mut data = Vec::with_capacity(self.height * self.width * c);
        for px in self.data.chunks_exact(self.channels.max(1)) {
            data.extend_from_slice(&px[range.clone()]);
        }
        Ok(RasterWindow {
            origin: self.origin,
            height: self.height,
            width: self.width,
            channels: c,
            data,
            channel_names: self.channel_names[range].to_vec(),
        })
    }

    pub fn to_tensor(&self, dtype: DType) -> Tensor {
        Tensor {
            dtype,
            dims: vec![self.height as u32, self.width as u32, self.channels as u32],
            data: self.data.clone(),
        }
    }

    /// Writes the RTEN tensor and a `.meta` sidecar: `x,y,q` on the first
    /// line then one channel name per line.
    pub fn write(&self, path: impl AsRef<Path>, dtype: DType) -> Result<()> {
        let path = path.as_ref();
        self.to_tensor(dtype).write(path)?;
        let mut meta = format!("{},{},{}\n", self.origin.x, self.origin.y, self.origin.q);
        for name in &self.channel_names {
            writeln!(meta, "{name}").expect("string write");
        }
        write_atomic(&sidecar_path(path, "meta"), meta.as_bytes())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let tensor = Tensor::read(path)?;
        let meta = std::fs::read_to_string(sidecar_path(path, "meta"))?;
        let mut lines = meta.lines();
        let header = lines.next().unwrap_or_default();
        let nums: Vec<u32> = header
            .split(',')
            .map(|v| v.trim().parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::format(0, format!("bad raster origin line {header:?}")))?;
        let [x, y, q] = nums[..] else {
            return Err(Error::format(0, format!("bad raster origin line {header:?}")));
        };
        let q = u8::try_from(q).map_err(|_| Error::format(0, "zoom out of range"))?;
        let origin = TileCoord::new(q, x, y)?;
        let channel_names: Vec<String> = lines.map(str::to_string).collect();
        if tensor.dims.len() != 3 || tensor.dims[2] as usize != channel_names.len() {
            return Err(Error::Geometry(format!(
                "raster dims {:?} do not match {} channel names",
                tensor.dims,
                channel_names.len()
            )));
        }
        Ok(RasterWindow {
            origin,
            height: tensor.dims[0] as usize,
            width: tensor.dims[1] as usize,
            channels: tensor.dims[2] as usize,
            data: tensor.data,
            channel_names,
        })
    }
}

/// Elementwise `ln(1 + x)`.
pub fn log_normalize(rw: &RasterWindow) -> Result<RasterWindow> {
    if let Some(bad) = rw.data.iter().find(|v| v.is_nan() || **v < 0.0) {
        return Err(Error::Domain(format!("log-normalization needs x >= 0, got {bad}")));
    }
    Ok(RasterWindow {
        data: rw.data.iter().map(|v| v.ln_1p()).collect(),
        ..rw.clone()
    })
}

/// Inverse of [`log_normalize`].
pub fn log_denormalize(rw: &RasterWindow) -> RasterWindow {
    RasterWindow {
        data: rw.data.iter().map(|v| v.exp_m1()).collect(),
        ..rw.clone()
    }
}

/// Concatenates rasters of identical geometry along the channel axis.
pub fn fuse_channels(parts: &[RasterWindow]) -> Result<RasterWindow> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Geometry("nothing to fuse".into()))?;
    for p in &parts[1..] {
        if p.origin != first.origin || p.height != first.height || p.width != first.width {
            return Err(Error::Geometry(format!(
                "cannot fuse {}x{} at {} with {}x{} at {}",
                first.height, first.width, first.origin, p.height, p.width, p.origin
            )));
        }
    }
    let channels: usize = parts.iter().map(|p| p.channels).sum();
    let pixels = first.height * first.width;
    let mut data = Vec::with_capacity(pixels * channels);
    for px in 0..pixels {
        for p in parts {
            data.extend_from_slice(&p.data[px * p.channels..(px + 1) * p.channels]);
        }
    }
    Ok(RasterWindow {
        origin: first.origin,
        height: first.height,
        width: first.width,
        channels,
        data,
        channel_names: parts.iter().flat_map(|p| p.channel_names.iter().cloned()).collect(),
    })
}
