//! Perron roots, cycle gains, cycle transversals and determinant inequalities
//! for nonnegative weightings of strongly connected digraphs.

pub mod classification;
pub mod constructions;
pub mod cycles;
pub mod digraph;
pub mod error;
pub mod family;
pub mod fvs;
pub mod inequalities;
pub mod graph;
pub mod interval;
pub mod linalg;
mod par;
pub mod poly;
pub mod scalar;
pub mod special;
pub mod sweep;
pub mod spectral;

pub use error::{Error, Result};
