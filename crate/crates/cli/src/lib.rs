//! Configuration, file formats and subcommands of the `scalarfield` CLI.

pub mod commands;
pub mod config;
pub mod io;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

/// Exit code for an error: numerical failures map to 3, everything else
/// (bad config, bad input files, I/O) to 2.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<scalarfield::Error>())
        .any(|e| e.is_numerical());
    if numerical {
        exit::NUMERICAL
    } else {
        exit::USAGE
    }
}
