use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use reach_core::geo::{TileCoord, TileWindow};
use reach_core::raster::{crm, embedding_raster, hcrm, log_normalize, parse_linestrings, rnp, sc, DEFAULT_WINDOW};
use reach_core::tensor::{DType, EmbeddingTable};

use super::{load_trajectories, InputFormat};
use crate::usage;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Record counts
    Crm,
    /// Record counts by heading
    Hcrm,
    /// Record counts by speed
    Sc,
    /// Road network presence
    Rnp,
    /// Per-tile embedding vectors
    Embedding,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DTypeArg {
    F32,
    F64,
}

/// `X,Y[,H,W]` with the size defaulting to the standard window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub x: u32,
    pub y: u32,
    pub height: u32,
    pub width: u32,
}

fn parse_window(s: &str) -> Result<WindowSpec, String> {
    let parts: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y] => Ok(WindowSpec { x, y, height: DEFAULT_WINDOW, width: DEFAULT_WINDOW }),
        [x, y, height, width] => Ok(WindowSpec { x, y, height, width }),
        _ => Err("expected X,Y or X,Y,H,W".into()),
    }
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Top-left tile and size: X,Y[,H,W]
    #[arg(long, value_parser = parse_window)]
    pub window: WindowSpec,
    #[arg(long, default_value_t = 24)]
    pub zoom: u8,
    /// Trajectories (crm, hcrm, sc)
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "generic")]
    pub format: InputFormat,
    /// REMB embedding file (embedding)
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Embedding dimension (embedding)
    #[arg(long)]
    pub dr: Option<usize>,
    /// WKT LINESTRING file, one road per line (rnp)
    #[arg(long)]
    pub roads: Option<PathBuf>,
    /// Apply ln(1 + x) to every value
    #[arg(long)]
    pub log_normalize: bool,
    #[arg(long, value_enum, default_value = "f32")]
    pub dtype: DTypeArg,
    #[arg(long)]
    pub output: PathBuf,
}

fn check_flags(args: &Args) -> Result<()> {
    let traj = matches!(args.kind, Kind::Crm | Kind::Hcrm | Kind::Sc);
    let want = |present: bool, needed: bool, flag: &str| -> Result<()> {
        match (present, needed) {
            (false, true) => Err(usage(format!("--kind {:?} needs {flag}", args.kind).to_lowercase())),
            (true, false) => Err(usage(format!("{flag} does not apply to --kind {:?}", args.kind).to_lowercase())),
            _ => Ok(()),
        }
    };
    want(args.input.is_some(), traj, "--input")?;
    want(args.roads.is_some(), args.kind == Kind::Rnp, "--roads")?;
    want(args.embeddings.is_some(), args.kind == Kind::Embedding, "--embeddings")?;
    want(args.dr.is_some(), args.kind == Kind::Embedding, "--dr")
}

pub fn run(args: Args) -> Result<u8> {
    check_flags(&args)?;
    let w = args.window;
    let origin = TileCoord::new(args.zoom, w.x, w.y)?;
    let window = TileWindow::new(origin, w.width, w.height)?;
    let mut raster = match args.kind {
        Kind::Crm | Kind::Hcrm | Kind::Sc => {
            let set = load_trajectories(args.input.as_deref().expect("checked"), args.format, args.zoom)?.set;
            match args.kind {
                Kind::Crm => crm(&set, &window)?,
                Kind::Hcrm => hcrm(&set, &window)?,
                _ => sc(&set, &window)?,
            }
        }
        Kind::Rnp => {
            let path = args.roads.as_deref().expect("checked");
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            rnp(&parse_linestrings(&text)?, &window)
        }
        Kind::Embedding => {
            let path = args.embeddings.as_deref().expect("checked");
            let table = EmbeddingTable::read(path).with_context(|| format!("reading {}", path.display()))?;
            embedding_raster(&table, &window, args.dr.expect("checked"))?
        }
    };
    if args.log_normalize {
        raster = log_normalize(&raster)?;
    }
    let dtype = match args.dtype {
        DTypeArg::F32 => DType::F32,
        DTypeArg::F64 => DType::F64,
    };
    raster.write(&args.output, dtype)?;
    println!("dims={}x{}x{}", raster.height, raster.width, raster.channels);
    println!("nonzero={}", raster.data.iter().filter(|&&v| v != 0.0).count());
    println!("sum={}", raster.data.iter().sum::<f64>());
    Ok(crate::EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_parsing() {
        assert_eq!(parse_window("5,6").unwrap(), WindowSpec { x: 5, y: 6, height: 256, width: 256 });
        assert_eq!(parse_window("5,6,10,20").unwrap(), WindowSpec { x: 5, y: 6, height: 10, width: 20 });
        assert!(parse_window("5,6,10").is_err());
        assert!(parse_window("a,6").is_err());
    }
}
