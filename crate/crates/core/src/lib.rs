pub mod alignment;
pub mod augment;
pub mod bvh;
pub mod cli;
pub mod error;
pub mod fusion;
pub mod geometry;
pub mod io;
pub mod kdtree;
pub mod losses;
pub mod mesh;
pub mod metrics;
pub mod pipeline;
pub mod predictor;
pub mod render;
pub mod synthetic;
pub mod view_sampling;

pub use error::{Error, Result};
