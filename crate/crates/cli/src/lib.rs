//! Command-line front end: run configuration, checkpoints and the subcommands.

pub mod checkpoint;
pub mod commands;
pub mod config;

use paygan::Error;

/// Stable process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAKE_DETECTED: u8 = 1;
    pub const IO: u8 = 2;
    pub const CONFIG: u8 = 3;
    pub const DATA: u8 = 4;
    pub const NUMERIC: u8 = 5;
    pub const VERSION: u8 = 6;
}

/// Maps a library error onto the exit-code contract.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => exit::IO,
        Error::Config(_) | Error::Argument(_) => exit::CONFIG,
        Error::Data(_) | Error::Parse { .. } | Error::Dimension(_) | Error::Domain(_) | Error::State(_) => {
            exit::DATA
        }
        Error::Numeric(_) => exit::NUMERIC,
        Error::Version { .. } => exit::VERSION,
    }
}
