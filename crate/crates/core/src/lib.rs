//! Reachability summaries of GPS trajectories over Web Mercator tiles.
//!
//! Trajectories are snapped to slippy-map tiles, every ordered pair of
//! records within a Chebyshev radius contributes to an emission channel at
//! the later tile and an absorption channel at the earlier one, and the
//! per-tile channels are stored sparsely. Around that sit raster baselines,
//! tensor export for downstream learners and a Markov-chain consistency
//! check of the channels.

mod codec;
pub mod error;
pub mod geo;
pub mod markov;
pub mod raster;
pub mod summary;
pub mod tensor;
pub mod trajectory;
pub mod transition;

pub use codec::write_atomic;
pub use error::{Error, Result};
pub use geo::{LatLon, TileCoord, TileWindow};
pub use summary::{build_reachability_map, brute_force_reference, ReachabilityMap};
pub use trajectory::{Trajectory, TrajectorySet};
pub use transition::{SummaryParams, Weighting};
