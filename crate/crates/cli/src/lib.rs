//! Command line and HTTP front end for the `qloan` engine.

pub mod api;
pub mod cli;
pub mod figures;
pub mod service;
