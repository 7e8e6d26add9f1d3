// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Kinetic exchange model of firm sizes with size-dependent retention, plus
//! the statistics used to detect bimodal steady states.

pub mod cli;
pub mod config;
pub mod error;
pub mod exchange;
pub mod experiments;
pub mod output;
pub mod rng;
pub mod simplex;
pub mod stats;

pub use error::{Error, Result};
pub use rng::RngStream;
