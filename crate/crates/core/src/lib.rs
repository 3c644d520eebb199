pub mod api;
pub mod error;
pub mod gallery;
pub mod geometric;
pub mod harness;
pub mod io;
pub mod learned;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod normalize;
pub mod sample;
pub mod seeds;
pub mod skeleton;
pub mod synth;

pub use error::{Error, Result};
