//! Library half of the `frobmod` command-line tool: report types, the
//! per-instance verification pipelines and the subcommands.

pub mod commands;
pub mod pipeline;
pub mod report;
