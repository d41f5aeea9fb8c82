//! Library surface of the pipeline CLI: run configuration, stage functions
//! with file-based handoff, and the run manifest. The binary in `main.rs`
//! is a thin argument-parsing layer over these.

pub mod config;
pub mod manifest;
pub mod stages;
