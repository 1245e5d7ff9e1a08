//! Files, configuration, the parallel Monte-Carlo driver and the command-line
//! front end around `lasso-s-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod model;
pub mod runner;
