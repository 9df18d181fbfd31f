//! Monte-Carlo ensembles, grid evaluation and the command-line front end for
//! the `popcorn-core` numerics.

pub mod commands;
pub mod ensemble;
pub mod grid;
pub mod output;

pub use popcorn_core;
