//! File formats and plotting for the `pathdob` command-line tool.

pub mod config;
pub mod export;
pub mod plot;
