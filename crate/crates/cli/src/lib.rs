//! Experiment plumbing behind the `frontfix` binary: config files, run
//! bundles, reference bundles, comparisons and table sweeps.

pub mod bundle;
pub mod compare;
pub mod config;
pub mod error;
pub mod oracle_cmd;
pub mod reproduce;
