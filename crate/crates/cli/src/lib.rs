//! Library half of the `fingersim` command-line tool.
//!
//! The binary is a thin argument-parsing shell; all behavior lives here so
//! integration tests can exercise it in-process:
//!
//! * [`config`] — the flat `section.key = value` configuration format.
//! * [`trace_io`] — lossless CSV serialization of traces.
//! * [`plot`] — the five SVG figures derived from a trace.
//! * [`commands`] — the `simulate`, `metrics`, `plot`, and `sweep`
//!   implementations with their stable exit codes.

pub mod commands;
pub mod config;
pub mod plot;
pub mod trace_io;
