pub mod bench;
pub mod export;
pub mod rasterize;
pub mod summarize;
pub mod synth;
pub mod tdrive;
pub mod verify;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use reach_core::trajectory::{
    parse_csv, preprocess_tdrive, CsvFormat, IngestStats, TrackPoint, Trajectory, TrajectorySet,
};
use reach_core::transition::{SummaryParams, Weighting};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Generic,
    Tdrive,
}

impl From<InputFormat> for CsvFormat {
    fn from(f: InputFormat) -> Self {
        match f {
            InputFormat::Generic => CsvFormat::Generic,
            InputFormat::Tdrive => CsvFormat::Tdrive,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightingArg {
    Unit,
    Gaussian,
}

/// Weighting flags shared by the commands that build summaries.
#[derive(clap::Args, Debug, Clone)]
pub struct WeightingArgs {
    /// Per-pair weight
    #[arg(long, value_enum, default_value = "unit")]
    pub weighting: WeightingArg,
    /// Distance scale in meters (gaussian only)
    #[arg(long, required_if_eq("weighting", "gaussian"))]
    pub sigma_d: Option<f64>,
    /// Time scale in seconds (gaussian only)
    #[arg(long, required_if_eq("weighting", "gaussian"))]
    pub sigma_t: Option<f64>,
}

impl WeightingArgs {
    pub fn params(&self, zoom: u8, delta_r: u32) -> Result<SummaryParams> {
        let weighting = match self.weighting {
            WeightingArg::Unit => {
                if self.sigma_d.is_some() || self.sigma_t.is_some() {
                    return Err(crate::usage("--sigma-d/--sigma-t only apply to gaussian weighting"));
                }
                Weighting::Unit
            }
            WeightingArg::Gaussian => Weighting::Gaussian {
                sigma_d: self.sigma_d.expect("required by clap"),
                sigma_t: self.sigma_t.expect("required by clap"),
            },
        };
        Ok(SummaryParams::new(zoom, delta_r, weighting)?)
    }
}

pub struct Loaded {
    pub set: TrajectorySet,
    pub stats: IngestStats,
    /// Distinct mover ids before any per-day split.
    pub movers: usize,
}

fn input_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).with_context(|| format!("reading {}", path.display()))? {
        let p = entry?.path();
        if p.is_file() {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Reads one file or every file of a directory. T-Drive input is split into
/// per-day trajectories.
pub fn load_trajectories(path: &Path, format: InputFormat, zoom: u8) -> Result<Loaded> {
    let mut stats = IngestStats::default();
    let mut by_mover: BTreeMap<String, Vec<TrackPoint>> = BTreeMap::new();
    for file in input_files(path)? {
        let reader = BufReader::new(File::open(&file).with_context(|| format!("opening {}", file.display()))?);
        let parsed = parse_csv(reader, format.into(), zoom).with_context(|| format!("parsing {}", file.display()))?;
        stats.lines += parsed.stats.lines;
        stats.malformed += parsed.stats.malformed;
        stats.duplicates_dropped += parsed.stats.duplicates_dropped;
        if stats.malformed_samples.len() < 5 {
            stats.malformed_samples.extend(parsed.stats.malformed_samples);
        }
        for t in parsed.set.trajectories {
            by_mover.entry(t.id).or_default().extend(t.points);
        }
    }
    let movers = by_mover.len();
    let trajectories = by_mover
        .into_iter()
        .map(|(id, points)| {
            let (t, dropped) = Trajectory::from_points(id, points);
            stats.duplicates_dropped += dropped;
            t
        })
        .collect();
    let mut set = TrajectorySet::spanning(trajectories, zoom);
    if format == InputFormat::Tdrive {
        set = preprocess_tdrive(&set);
    }
    if stats.malformed > 0 {
        eprintln!(
            "skipped {} malformed lines (first at lines {:?})",
            stats.malformed, stats.malformed_samples
        );
    }
    Ok(Loaded { set, stats, movers })
}

/// Streams output into a temporary file beside `path` and renames it into
/// place, so a failure never leaves a partial file.
pub fn write_output(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating output in {}", dir.display()))?;
    let mut w = BufWriter::new(tmp);
    body(&mut w).with_context(|| format!("writing {}", path.display()))?;
    let tmp = w.into_inner().map_err(|e| e.into_error())?;
    tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
