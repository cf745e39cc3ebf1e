//! Sphere- and circle-valued coordinates for point clouds from persistent
//! cohomology classes and energy-minimizing maps.

pub mod cohomology;
pub mod complex;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod mapping;
pub mod optimizer;
pub mod pipeline;
pub mod postprocess;
pub mod synth;

pub use error::{Error, ErrorCategory, Result};
