//! Configuration, field dumps, plots and command dispatch.

pub mod config;
pub mod dispatch;
pub mod solgrid;
pub mod svg;

pub use config::{parse_config, ConfigErrors, ConfigIssue, RunConfig};
pub use dispatch::{dispatch, RunManifest, Subcommand, TableFormat};
pub use solgrid::{dump_grid, load_grid};
pub use svg::render_svg;
