//! Certified Kaufman pipeline: bump, prime windows, coefficient tables,
//! constants, schedules and level data.

pub mod bump;
pub mod coeffs;
pub mod levels;
pub mod primes;
pub mod schedule;
