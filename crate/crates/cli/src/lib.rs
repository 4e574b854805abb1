//! Command implementations, configuration, and file formats behind the
//! `sav` binary. The binary itself only parses arguments and maps errors
//! to exit codes.

pub mod commands;
pub mod config;
pub mod io;
pub mod manifest;
