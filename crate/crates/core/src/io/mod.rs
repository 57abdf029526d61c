//! Configuration, trajectory files and plot data.

mod config;
mod export;
pub mod plot;

pub use config::{
    parse_config, AnalysisSection, DensitySection, DesignConfig, DesignSection, FovConfig, HardwareSection,
    OutputSection, ResolutionConfig,
};
pub use export::{
    encode_payload, export_trajectory, fnv1a64, import_trajectory, payload_records, write_json, ExportedFiles,
    ImportedTrajectory, TrajectoryFileHeader, Units, FORMAT_VERSION, PAYLOAD_LAYOUT,
};
