// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod hermite;
pub mod lab;
pub mod optimize;
pub mod process;
pub mod quadrature;
pub mod rng;
pub mod series;
pub mod spectral;
pub mod stats;
pub mod study;
pub mod transform;
pub mod whittle;

pub use error::{LrdError, Result};
