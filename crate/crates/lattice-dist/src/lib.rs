//! File formats, parallel drivers and the command-line front end for
//! `lattice-dist-core`.

pub mod cli;
pub mod format;
pub mod parallel;
