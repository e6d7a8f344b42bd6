//! Std companion to `gridsynth-core`: JSON file formats, atomic output,
//! parallel sample generation, comparison reports and the `gridsynth`
//! command line.

pub mod cli;
pub mod format;
pub mod fsio;
pub mod parallel;
pub mod report;

pub use format::{load_topology, serialize_topology, FormatError, LoadedSample, NetworkDocument, ParametersDocument};
