use std::path::PathBuf;

use anyhow::{Context, Result};
use reach_core::markov::{cke_verify, neighborhood_coverage, required_delta_r, CkeStatus, Coverage};
use reach_core::summary::{build_reachability_map, read_rsum};
use reach_core::transition::MAX_DELTA_R;

use super::{default_workers, load_trajectories, InputFormat, WeightingArgs};

#[derive(clap::Args, Debug)]
#[group(id = "source", required = true, multiple = false, args = ["rsum", "input"])]
pub struct Args {
    /// Summary file to check
    #[arg(long)]
    pub rsum: Option<PathBuf>,
    /// Trajectories to summarize and check
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "generic", requires = "input")]
    pub format: InputFormat,
    #[arg(long, default_value_t = 24, requires = "input")]
    pub zoom: u8,
    /// Neighborhood radius [default: smallest radius covering every pair]
    #[arg(long, requires = "input")]
    pub delta_r: Option<u32>,
    #[command(flatten)]
    pub weighting: WeightingArgs,
    #[arg(long, env = "REACH_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,
}

pub fn run(args: Args) -> Result<u8> {
    let (map, coverage) = if let Some(path) = &args.rsum {
        let map = read_rsum(path).with_context(|| format!("reading {}", path.display()))?;
        (map, Coverage::Unknown)
    } else {
        let input = args.input.as_ref().expect("clap group");
        let set = load_trajectories(input, args.format, args.zoom)?.set;
        let delta_r = match args.delta_r {
            Some(d) => d,
            None => {
                let need = required_delta_r(&set).max(1);
                if need > MAX_DELTA_R {
                    return Err(crate::usage(format!(
                        "trajectories span {need} tiles, beyond the largest radius {MAX_DELTA_R}"
                    )));
                }
                need
            }
        };
        let params = args.weighting.params(args.zoom, delta_r)?;
        let workers = args.workers.map_or_else(default_workers, |w| w as usize);
        let map = build_reachability_map(&set, &params, workers)?;
        println!("delta_r={delta_r}");
        (map, neighborhood_coverage(&set, delta_r))
    };
    let report = cke_verify(&map, coverage)?;
    println!("{report}");
    Ok(match report.status {
        CkeStatus::Pass | CkeStatus::NotApplicable => crate::EXIT_OK,
        CkeStatus::Fail => crate::EXIT_VERIFY_FAILED,
    })
}
