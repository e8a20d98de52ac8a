//! Strong-scaling benchmark: wall time of the summary builder per worker
//! count, and optionally per dataset size.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{ensure, Result};
use reach_core::summary::build_reachability_map;
use reach_core::trajectory::{synth_trajectories, SynthConfig, TrajectorySet, SCALING_PRESETS};
use reach_core::transition::{SummaryParams, DEFAULT_DELTA_R};

use super::{load_trajectories, write_output, InputFormat};
use crate::usage;

pub const CSV_HEADER: &str = "dataset,workers,run,seconds,efficiency";

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("values must be positive".to_string()),
        Ok(v) => Ok(v),
        Err(e) => Err(format!("{s:?}: {e}")),
    }
}

fn parse_preset(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if SCALING_PRESETS.contains(&n) {
        Ok(n)
    } else {
        Err(format!("presets are {SCALING_PRESETS:?}"))
    }
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Synthetic dataset size (trajectories)
    #[arg(long, default_value_t = 2000, value_parser = parse_preset)]
    pub preset: usize,
    /// Worker counts, e.g. 1,2,4,8; the first is the efficiency baseline
    #[arg(long, default_value = "1,2,4", value_delimiter = ',', value_parser = parse_positive)]
    pub workers: Vec<usize>,
    #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u32).range(1..))]
    pub repeats: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_DELTA_R)]
    pub delta_r: u32,
    /// Benchmark several synthetic sizes instead of the preset
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub sweep_trajectories: Option<Vec<usize>>,
    /// Real trajectories instead of synthetic data
    #[arg(long, conflicts_with = "sweep_trajectories")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "generic", requires = "input")]
    pub format: InputFormat,
    #[arg(long, default_value_t = 24)]
    pub zoom: u8,
    /// Also emit one row per run
    #[arg(long)]
    pub per_run: bool,
    /// CSV destination
    #[arg(long)]
    pub output: PathBuf,
}

pub struct BenchConfig {
    pub datasets: Vec<(String, TrajectorySet)>,
    pub workers: Vec<usize>,
    pub repeats: u32,
    pub params: SummaryParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub dataset: String,
    pub workers: usize,
    pub run: u32,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub workers: usize,
    pub mean_s: f64,
    pub median_s: f64,
    /// `t_baseline * (c_baseline / c) / t_c` on mean times.
    pub efficiency: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    /// Dataset label, trajectory count and digest.
    pub datasets: Vec<(String, usize, String)>,
    pub runs: Vec<Run>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

impl BenchReport {
    pub fn rows(&self) -> Vec<BenchRow> {
        let mut out = Vec::new();
        for (label, _, _) in &self.datasets {
            let mut baseline: Option<(usize, f64)> = None;
            let mut seen: Vec<usize> = Vec::new();
            for r in self.runs.iter().filter(|r| &r.dataset == label) {
                if seen.contains(&r.workers) {
                    continue;
                }
                seen.push(r.workers);
                let mut times: Vec<f64> = self
                    .runs
                    .iter()
                    .filter(|x| &x.dataset == label && x.workers == r.workers)
                    .map(|x| x.seconds)
                    .collect();
                let mean_s = times.iter().sum::<f64>() / times.len() as f64;
                let median_s = median(&mut times);
                let (c0, t0) = *baseline.get_or_insert((r.workers, mean_s));
                out.push(BenchRow {
                    dataset: label.clone(),
                    workers: r.workers,
                    mean_s,
                    median_s,
                    efficiency: t0 * (c0 as f64 / r.workers as f64) / mean_s,
                });
            }
        }
        out
    }

    /// Least-squares slope of ln(time) against ln(trajectory count) at the
    /// largest worker count; `None` with fewer than two sizes.
    pub fn power_law_exponent(&self) -> Option<f64> {
        let rows = self.rows();
        let top = rows.iter().map(|r| r.workers).max()?;
        let pts: Vec<(f64, f64)> = self
            .datasets
            .iter()
            .filter_map(|(label, n, _)| {
                let r = rows.iter().find(|r| &r.dataset == label && r.workers == top)?;
                Some(((*n as f64).ln(), r.mean_s.ln()))
            })
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    pub fn to_csv(&self, per_run: bool) -> String {
        let mut s = format!("{CSV_HEADER}\n");
        let rows = self.rows();
        if per_run {
            for r in &self.runs {
                let base = rows.iter().find(|x| x.dataset == r.dataset).expect("has rows");
                let eff = base.mean_s * (base.workers as f64 / r.workers as f64) / r.seconds;
                writeln!(s, "{},{},{},{:.6},{:.4}", r.dataset, r.workers, r.run, r.seconds, eff).unwrap();
            }
        }
        for r in rows {
            writeln!(s, "{},{},mean,{:.6},{:.4}", r.dataset, r.workers, r.mean_s, r.efficiency).unwrap();
        }
        s
    }
}

/// Times `build_reachability_map` for every dataset, worker count and
/// repeat. Worker counts are interleaved within each repeat so drift in
/// machine load spreads evenly.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    ensure!(!cfg.workers.is_empty(), "no worker counts given");
    let mut report = BenchReport::default();
    for (label, set) in &cfg.datasets {
        report.datasets.push((label.clone(), set.trajectories.len(), set.digest()));
        for run in 1..=cfg.repeats {
            for &workers in &cfg.workers {
                let start = Instant::now();
                let map = build_reachability_map(set, &cfg.params, workers)?;
                let seconds = start.elapsed().as_secs_f64();
                std::hint::black_box(map);
                report.runs.push(Run {
                    dataset: label.clone(),
                    workers,
                    run,
                    seconds,
                });
            }
        }
    }
    Ok(report)
}

pub fn synthetic(count: usize, seed: u64) -> Result<TrajectorySet> {
    Ok(synth_trajectories(&SynthConfig::preset(count, seed))?)
}

pub fn run(args: Args) -> Result<u8> {
    let params = SummaryParams::unit(args.zoom, args.delta_r)?;
    let datasets = if let Some(path) = &args.input {
        let set = load_trajectories(path, args.format, args.zoom)?.set;
        vec![(path.display().to_string(), set)]
    } else {
        if args.zoom != 24 {
            return Err(usage("synthetic datasets are zoom 24"));
        }
        let sizes = args.sweep_trajectories.clone().unwrap_or_else(|| vec![args.preset]);
        sizes
            .into_iter()
            .map(|n| Ok((n.to_string(), synthetic(n, args.seed)?)))
            .collect::<Result<_>>()?
    };
    let report = run_bench(&BenchConfig {
        datasets,
        workers: args.workers.clone(),
        repeats: args.repeats,
        params,
    })?;
    let csv = report.to_csv(args.per_run);
    write_output(&args.output, |w| w.write_all(csv.as_bytes()))?;
    for (label, n, digest) in &report.datasets {
        println!("dataset={label} trajectories={n} digest={digest}");
    }
    for r in report.rows() {
        println!(
            "dataset={} workers={} mean_s={:.4} median_s={:.4} efficiency={:.3}",
            r.dataset, r.workers, r.mean_s, r.median_s, r.efficiency
        );
    }
    if let Some(k) = report.power_law_exponent() {
        println!("power_law_exponent={k:.3}");
    }
    Ok(crate::EXIT_OK)
}
