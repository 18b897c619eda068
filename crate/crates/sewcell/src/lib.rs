//! Definition files, verification reports and the command implementations
//! behind the `sewcell` binary.

pub mod commands;
pub mod file;
pub mod report;

pub use commands::{cmd_nullity, cmd_sew, cmd_verify, CommandError, ConventionChoice};
pub use file::{load, FileError, ManifoldFile, Provenance};
pub use report::{Report, Settings};
