//! Operator-facing surfaces for the catalog: the `crmcat` command line and
//! the HTTP JSON service behind the web workbench.

pub mod cli;
pub mod config;
pub mod envelope;
pub mod ops;
pub mod service;
