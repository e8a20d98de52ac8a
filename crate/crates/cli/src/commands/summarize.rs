use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use reach_core::summary::{build_reachability_map, write_rsum};
use reach_core::transition::{Flag, DEFAULT_DELTA_R};

use super::{default_workers, load_trajectories, InputFormat, WeightingArgs};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Trajectory CSV file or directory of files
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "generic")]
    pub format: InputFormat,
    #[arg(long, default_value_t = 24)]
    pub zoom: u8,
    /// Neighborhood radius in tiles
    #[arg(long, default_value_t = DEFAULT_DELTA_R)]
    pub delta_r: u32,
    #[command(flatten)]
    pub weighting: WeightingArgs,
    /// Worker threads [default: available cores]
    #[arg(long, env = "REACH_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,
    /// Start of the observation interval (epoch seconds)
    #[arg(long, requires = "dt", allow_hyphen_values = true)]
    pub t0: Option<i64>,
    /// Length of the observation interval in seconds
    #[arg(long, requires = "t0")]
    pub dt: Option<i64>,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: Args) -> Result<u8> {
    let params = args.weighting.params(args.zoom, args.delta_r)?;
    let workers = args.workers.map_or_else(default_workers, |w| w as usize);
    let loaded = load_trajectories(&args.input, args.format, args.zoom)?;
    let set = match (args.t0, args.dt) {
        (Some(t0), Some(dt)) => loaded.set.window(t0, dt)?,
        _ => loaded.set,
    };
    let start = Instant::now();
    let map = build_reachability_map(&set, &params, workers)?;
    let elapsed = start.elapsed();
    write_rsum(&map, &args.output).with_context(|| format!("writing {}", args.output.display()))?;
    println!("trajectories={}", set.trajectories.len());
    println!("records={}", set.record_count());
    println!("nodes={}", map.len());
    println!("mass={}", map.total_mass(Flag::Absorption));
    println!("workers={workers}");
    println!("elapsed_s={:.3}", elapsed.as_secs_f64());
    Ok(crate::EXIT_OK)
}
