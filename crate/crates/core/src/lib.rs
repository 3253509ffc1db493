//! Filament modes in saturable media, split-step propagation, and the
//! curvature fixed point that closes a filament into a torus.

pub mod error;
pub mod medium;
pub mod bpm;
pub mod radial;
pub mod torus;
pub mod experiments;
pub mod io;

pub use error::{Error, Result};
pub use medium::{MediumParams, WaveParams};
