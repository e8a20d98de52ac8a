use std::path::PathBuf;

use anyhow::Result;
use reach_core::trajectory::write_generic_csv;

use super::{load_trajectories, write_output, InputFormat};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// T-Drive directory (one file per taxi) or single file
    #[arg(long)]
    pub input: PathBuf,
    /// Generic CSV destination
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: Args) -> Result<u8> {
    // zoom only matters for tiling, which the CSV does not carry
    let loaded = load_trajectories(&args.input, InputFormat::Tdrive, 24)?;
    write_output(&args.output, |w| write_generic_csv(&loaded.set, w))?;
    println!("taxis={}", loaded.movers);
    println!("trajectories={}", loaded.set.trajectories.len());
    println!("records={}", loaded.set.record_count());
    println!("duplicates_dropped={}", loaded.stats.duplicates_dropped);
    println!("malformed={}", loaded.stats.malformed);
    Ok(crate::EXIT_OK)
}
