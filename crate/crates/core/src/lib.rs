//! Frame importance for imitation learning demonstrations.
//!
//! A demonstration set of `H` fixed-length trajectories is treated as an
//! `H x T` image whose pixels are frames. Frames are grouped into snippets on
//! an `H x G` grid; random binary masks over that grid drop snippets, a fresh
//! imitation learner is trained on what is left, and the learner's mean
//! environment return weights the mask. The normalized sum of weighted masks
//! is the importance map.
//!
//! Module map:
//!
//! - [`demo`], [`grid`], [`map`], [`stats`], [`config`]: shared data model.
//! - [`envs`]: finite MDPs with exact experts, rollouts and evaluation.
//! - [`learners`]: black-box imitation learners.
//! - [`masking`]: random mask generation and `D ⊙ m`.
//! - [`engine`]: the retrain-and-evaluate loop.
//! - [`analysis`]: threshold curves, map comparison and mask transfer.
//! - [`formats`], [`cli`]: text formats and the command-line surface.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod demo;
pub mod engine;
pub mod envs;
pub mod error;
pub mod formats;
pub mod grid;
pub mod learners;
pub mod map;
pub mod masking;
pub mod seed;
pub mod stats;

pub use config::RunConfig;
pub use demo::{DemoSet, Step, Trajectory};
pub use error::{Error, Result};
pub use grid::{GridGeometry, MaskGrid};
pub use map::ImportanceMap;
pub use stats::ReturnStats;
