//! Persistence and interchange formats for the `chebrb` command line tool:
//! the binary polynomial container and the CSV quote/grid readers.

pub mod container;
pub mod csvio;
