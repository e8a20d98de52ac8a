use std::io::{BufRead, Write};

use chrono::NaiveDateTime;

use super::{RawRecord, TrajectorySet, TDRIVE_UTC_OFFSET_S};
use crate::error::{Error, Result};
use crate::geo::LatLon;

const MAX_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvFormat {
    /// `mover_id,epoch_seconds,lat,lon`, optional header.
    Generic,
    /// `taxi_id,YYYY-MM-DD HH:MM:SS,longitude,latitude` in Beijing local time.
    Tdrive,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub lines: usize,
    pub malformed: usize,
    /// 1-based line numbers of the first malformed lines.
    pub malformed_samples: Vec<usize>,
    pub duplicates_dropped: usize,
}

#[derive(Debug, Clone)]
pub struct ParsedSet {
    pub set: TrajectorySet,
    pub stats: IngestStats,
}

/// Reads a trajectory CSV and tiles it at zoom `q`.
///
/// Malformed lines are skipped and counted; if more than half of the
/// non-empty lines are malformed the whole input is rejected.
pub fn parse_csv<R: BufRead>(reader: R, format: CsvFormat, q: u8) -> Result<ParsedSet> {
    crate::geo::check_zoom(q)?;
    let mut stats = IngestStats::default();
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 && format == CsvFormat::Generic && is_generic_header(line) {
            continue;
        }
        stats.lines += 1;
        let parsed = match format {
            CsvFormat::Generic => parse_generic_line(line),
            CsvFormat::Tdrive => parse_tdrive_line(line),
        };
        match parsed {
            Some(r) => records.push(r),
            None => {
                stats.malformed += 1;
                if stats.malformed_samples.len() < MAX_SAMPLES {
                    stats.malformed_samples.push(i + 1);
                }
            }
        }
    }
    if stats.malformed * 2 > stats.lines {
        return Err(Error::TooManyMalformed {
            malformed: stats.malformed,
            total: stats.lines,
            samples: stats.malformed_samples,
        });
    }
    let (set, dropped) = TrajectorySet::from_raw(records, q)?;
    stats.duplicates_dropped = dropped;
    Ok(ParsedSet { set, stats })
}

fn is_generic_header(line: &str) -> bool {
    match line.split(',').nth(1) {
        Some(field) => field.trim().parse::<f64>().is_err(),
        None => false,
    }
}

fn fields<const N: usize>(line: &str) -> Option<[&str; N]> {
    let mut out = [""; N];
    let mut it = line.split(',');
    for slot in out.iter_mut() {
        *slot = it.next()?.trim();
    }
    it.next().is_none().then_some(out)
}

fn parse_epoch(s: &str) -> Option<i64> {
    let t = match s.parse::<i64>() {
        Ok(t) => t,
        Err(_) => {
            let f = s.parse::<f64>().ok()?;
            if !f.is_finite() || f.abs() > 9.0e15 {
                return None;
            }
            f.trunc() as i64
        }
    };
    (t >= 0).then_some(t)
}

fn parse_generic_line(line: &str) -> Option<RawRecord> {
    let [id, t, lat, lon] = fields::<4>(line)?;
    if id.is_empty() {
        return None;
    }
    let pos = LatLon::new(lat.parse().ok()?, lon.parse().ok()?).ok()?;
    Some(RawRecord {
        mover_id: id.to_string(),
        t: parse_epoch(t)?,
        pos,
    })
}

fn parse_tdrive_line(line: &str) -> Option<RawRecord> {
    let [id, stamp, lon, lat] = fields::<4>(line)?;
    if id.is_empty() {
        return None;
    }
    let local = NaiveDateTime::parse_from_str(stamp, "%Y-%m-%d %H:%M:%S").ok()?;
    let t = local.and_utc().timestamp() - TDRIVE_UTC_OFFSET_S;
    if t < 0 {
        return None;
    }
    let pos = LatLon::new(lat.parse().ok()?, lon.parse().ok()?).ok()?;
    Some(RawRecord {
        mover_id: id.to_string(),
        t,
        pos,
    })
}

/// Writes the set as generic CSV (no header), trajectories in order.
pub fn write_generic_csv<W: Write>(set: &TrajectorySet, mut out: W) -> std::io::Result<()> {
    for traj in &set.trajectories {
        for p in &traj.points {
            writeln!(out, "{},{},{},{}", traj.id, p.t, p.pos.lat, p.pos.lon)?;
        }
    }
    out.flush()
}
