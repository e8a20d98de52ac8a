use std::path::PathBuf;

use anyhow::{Context, Result};
use reach_core::summary::read_rsum;
use reach_core::tensor::{export_dense_tensors, read_index_sidecar};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Summary file to densify
    #[arg(long)]
    pub rsum: PathBuf,
    /// Optional `x,y` list selecting and ordering the nodes [default: all, (y, x) order]
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// RTEN destination; the node order goes to `<output>.idx`
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: Args) -> Result<u8> {
    let map = read_rsum(&args.rsum).with_context(|| format!("reading {}", args.rsum.display()))?;
    let nodes = match &args.nodes {
        Some(p) => Some(read_index_sidecar(p, map.params.q).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let order = export_dense_tensors(&map, nodes.as_deref(), &args.output)?;
    let side = map.params.side();
    println!("nodes={}", order.len());
    println!("dims={}x{side}x{side}x2", order.len());
    Ok(crate::EXIT_OK)
}
