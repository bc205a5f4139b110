//! Batch front end for the vlasov1d toolkit: config parsing, command
//! dispatch and artifact output.

pub mod config;
pub mod output;
pub mod run;
