//! Command-line companion to `permuton-lab-core`: file formats, parallel
//! drivers, verification suites and SVG rendering.

pub mod cli;
pub mod envelope;
pub mod par;
pub mod render;
pub mod verify;

pub use permuton_lab_core as core;
