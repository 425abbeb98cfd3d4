// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod cli;
pub mod detectors;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod numeric;
pub mod params;
pub mod powersum;
pub mod report;
pub mod weights;
pub mod zerosets;

pub use error::{Error, Result};
