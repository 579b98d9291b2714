//! Sweeps, trend fits, verification suites and their file outputs.

pub mod config;
pub mod fit;
pub mod svg;
pub mod sweep;
pub mod verify;
