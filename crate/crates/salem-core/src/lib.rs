//! Exact endpoints, certified Fourier bounds, and finite-level constructions
//! of Salem sets on `[0,1]`.

pub mod algebraic_endpoints;
pub mod enclosure;
pub mod dimension_lab;
pub mod error;
pub mod rat;

pub use algebraic_endpoints::{compare, EValue, OrderResult};
pub use error::{Result, SalemError};
pub mod hyperspace;
pub mod interval_sets;
pub mod kaufman_engine;
pub mod salem_constructions;

pub use interval_sets::{Interval, IntervalUnion};
