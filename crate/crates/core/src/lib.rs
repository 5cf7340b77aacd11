// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attenuator;
pub mod design;
pub mod devices;
pub mod error;
pub mod io;
pub mod mna;
pub mod netcore;

pub use error::{Error, Result};
