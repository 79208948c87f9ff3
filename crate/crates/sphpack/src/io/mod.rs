//! Run configuration parsing, geometry file ingestion (polygon CSV, STL),
//! particle/diagnostics serialization, and the end-to-end run drivers behind
//! the command-line interface.

pub mod config;
pub mod output;
pub mod polygon_csv;
pub mod run;
pub mod stl;

pub use config::{parse_config, render_config, Mode, OutputFormat, RunConfig, ShapeDecl};
pub use output::{read_particles_csv, write_energy_history, write_particles};
pub use polygon_csv::load_polygon_csv;
pub use run::{run_diagnose, run_relax, run_seed, RunArtifacts};
pub use stl::load_stl;
