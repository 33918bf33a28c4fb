//! Test support shared with the command-line acceptance suite.

pub mod checks;
pub mod oracles;
