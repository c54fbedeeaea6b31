//! File formats, seeded sampling, verification suites and the command line
//! front end for the `suspend-core` library.

pub mod cli;
pub mod format;
pub mod sample;
pub mod suites;
