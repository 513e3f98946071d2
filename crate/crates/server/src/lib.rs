//! HTTP service and command-line front end for `rulelens`.

pub mod cli;
pub mod service;
