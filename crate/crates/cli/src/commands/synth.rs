use std::path::PathBuf;

use anyhow::Result;
use clap::ValueEnum;
use reach_core::trajectory::{synth_trajectories, write_generic_csv, SynthConfig, SynthModel};

use super::write_output;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelArg {
    RandomWalk,
    RoadGrid,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of trajectories
    #[arg(long)]
    pub count: usize,
    #[arg(long, value_enum, default_value = "road-grid")]
    pub model: ModelArg,
    /// Street spacing in tiles (road-grid)
    #[arg(long, default_value_t = 8)]
    pub spacing: u32,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: Args) -> Result<u8> {
    let model = match args.model {
        ModelArg::RandomWalk => SynthModel::RandomWalk,
        ModelArg::RoadGrid => SynthModel::RoadGrid { spacing: args.spacing },
    };
    let cfg = SynthConfig {
        model,
        ..SynthConfig::preset(args.count, args.seed)
    };
    let set = synth_trajectories(&cfg)?;
    write_output(&args.output, |w| write_generic_csv(&set, w))?;
    println!("trajectories={}", set.trajectories.len());
    println!("records={}", set.record_count());
    println!("digest={}", set.digest());
    Ok(crate::EXIT_OK)
}
