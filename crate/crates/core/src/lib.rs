//! Join discovery for CSV data lakes from compact column profiles.
//!
//! The offline phase ingests a lake ([`catalog`]) and computes per-column
//! meta-feature profiles plus lake-wide normalization stats ([`profiler`]).
//! Join quality is defined by exact multiset measurements and a
//! truncated-normal continuous metric ([`joinmetric`]); a boosted-tree
//! regressor predicts that metric from profile differences ([`model`]) so
//! that queries never touch raw data. Discovery-by-attribute lives in
//! [`search`], and [`eval`] carries the benchmark harness and the synthetic
//! lake generator.

pub mod catalog;
pub mod error;
pub mod eval;
pub mod joinmetric;
pub mod model;
pub mod profiler;
pub mod search;

pub use error::{Error, Result};
