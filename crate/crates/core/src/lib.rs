// Index loops mirror the tensor notation; `!(h > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod algebroid;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod forms;
pub mod jet;
pub mod morphism;
pub mod num;
pub mod report;
pub mod scenarios;
pub mod variational;

pub use error::{Error, Result};
