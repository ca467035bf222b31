//! Command-line front end: system documents, the benchmark registry, and the
//! analyze, design, sweep, approximate and bench commands.

pub mod app;
pub mod bench;
pub mod commands;
pub mod document;
pub mod error;
pub mod plot;
pub mod registry;

pub use app::run;
pub use error::CliError;
