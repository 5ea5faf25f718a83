//! File formats, benchmarking and the command-line front end for
//! [`riverguard_core`].
//!
//! * [`formats`]: JSON instances, policies, parameter vectors, scenario sets
//!   and solver results.
//! * [`tables`]: CSV outputs.
//! * [`bench`]: parallel sweeps over generated instances.
//! * [`cli`]: the `riverguard` binary.

pub mod bench;
pub mod cli;
pub mod formats;
pub mod tables;

pub use riverguard_core as core;
