//! Subdivided prisms over complete graphs, comb and odd-set inequalities, the
//! slack-preserving map from odd-set slacks of perfect matchings to uniform
//! comb slacks of tours, and a two-party protocol simulator built on it.
//!
//! All slack arithmetic is exact integer arithmetic; ranks are computed over
//! the rationals by fraction-free elimination.

pub mod combinatorics;
pub mod error;
pub mod graph;
pub mod inequalities;
pub mod protocol;
pub mod reduction;
pub mod slack_lab;

pub use error::{Error, Result};
